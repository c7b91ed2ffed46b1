total = 0
i = 0
while i < 5:
    total += i
    i += 1
print(total)
