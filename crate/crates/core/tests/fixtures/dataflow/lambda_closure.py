base = 10
# %%
add = lambda q: q + base
# %%
add(1)
