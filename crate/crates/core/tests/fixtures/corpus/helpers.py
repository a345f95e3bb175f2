import os


def data_path(name):
    return os.path.join('data', name)
