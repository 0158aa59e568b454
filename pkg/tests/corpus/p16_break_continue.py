# track: seen
seen = 0
for i in range(100):
    if i % 3 == 0:
        continue
    if i > 10:
        break
    seen = seen + 1
print(seen)
