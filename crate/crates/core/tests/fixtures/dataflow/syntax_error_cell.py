a = 1
# %%
b = (
# %%
print(a)
