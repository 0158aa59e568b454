# track: x
def h():
    print("h")
    return 2

def g(v):
    print("g")
    return v + 3

def f(v):
    print("f")
    return v * 10

x = f(g(h()))
print(x)
