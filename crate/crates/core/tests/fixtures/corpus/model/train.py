from sklearn.model_selection import GridSearchCV


def search(model, grid):
    g = GridSearchCV(model, grid, cv=5)
    return g


x=[1,2]
