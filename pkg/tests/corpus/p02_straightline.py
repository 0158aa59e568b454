# track: y
x = 4
y = x * 3 + 1
z = y - x
print(x, y, z)
