x = 1
# %%
def f():
    x = 2
    return 3
# %%
f()
# %%
print(x)
