print(z)
# %%
z = 1
