def target():
    pass

def apply(fn):
    fn()

apply(target)
