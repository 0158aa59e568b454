import { readFileSync } from "node:fs";

import { TreeNode } from "../src/types.js";

export function fixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export function collect(root: TreeNode, pred: (n: TreeNode) => boolean): TreeNode[] {
  const out: TreeNode[] = [];
  const stack = [root];
  while (stack.length) {
    const node = stack.pop()!;
    if (pred(node)) out.push(node);
    stack.push(...node.children);
  }
  return out;
}
