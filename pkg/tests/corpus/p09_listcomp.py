# track: squares
squares = [i * i for i in range(8)]
print(squares)
print(sum(squares))
