a = b = 0
# %%
print(b)
