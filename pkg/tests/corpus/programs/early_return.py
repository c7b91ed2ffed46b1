def firstbig(limit):
    for i in range(limit):
        if i > 2:
            return i
    return -1

print(firstbig(6))
print(firstbig(2))
