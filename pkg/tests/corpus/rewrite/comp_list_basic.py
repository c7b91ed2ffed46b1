n = 5
lst = [i for i in range(n)]
print(lst)
