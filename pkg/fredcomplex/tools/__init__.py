all = ['plot']
