found = -1
for i in range(10):
    if i % 2 == 0:
        continue
    if i > 5:
        found = i
        break
print(found)
