combine = lambda a, b: a * 10 + b
print(combine(3, 4))
