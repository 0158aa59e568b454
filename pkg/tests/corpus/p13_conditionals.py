# track: label
for v in (-5, 0, 3, 11):
    if v < 0:
        label = "neg"
    elif v == 0:
        label = "zero"
    elif v < 10:
        label = "small"
    else:
        label = "big"
    print(v, label)
