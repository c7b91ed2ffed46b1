def clean(raw):
    return raw.strip().lower()

parts = "A,B".split(",")
word = clean("  MiXeD ")
flag = word.startswith("m")
