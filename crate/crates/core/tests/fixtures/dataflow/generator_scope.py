g = (w for w in range(3) if w)
# %%
list(g)
