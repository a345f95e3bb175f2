def setup():
    global cfg
    cfg = {}
# %%
setup()
