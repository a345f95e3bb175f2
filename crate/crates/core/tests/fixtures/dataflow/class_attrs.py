class C:
    attr = 1
    def m(self):
        local = 2
        return self.attr
# %%
C().m()
