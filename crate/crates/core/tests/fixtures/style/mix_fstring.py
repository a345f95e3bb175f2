name = 'x'
print(f'{name}:{1+2}')
