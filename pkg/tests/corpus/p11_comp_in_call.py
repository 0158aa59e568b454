# track:
def total(xs):
    s = 0
    for x in xs:
        s = s + x
    return s

print(total([k * 2 for k in range(5)]))
