def alpha():
    pass

def beta():
    pass

chosen = alpha
flag = 1
if flag > 0:
    chosen = beta
chosen()
