# track: never
items = []
for x in items:
    never = x
count = 0
while count > 5:
    count = count - 1
print("done", count)
