# track: m
import math

xs = [3, 1, 4, 1, 5, 9, 2, 6]
m = max(xs)
print(len(xs), m, math.floor(math.sqrt(m)))
