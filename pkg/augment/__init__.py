"""
Foreground copy-paste under SSD constraints, background perturbation and Mix baselines
"""
