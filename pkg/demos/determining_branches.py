"""Plug every catalogued branch back into its determining system.

Run: python demos/determining_branches.py
"""
from spinorbit import catalog as C
from spinorbit import determining as D

for branch in C.list_solutions():
    sol = C.get_solution(branch)
    printed = D.check_solution(sol.family, branch).status
    corrected = D.check_solution(sol.family, branch, corrected=True).status
    print(f"{branch:24s} printed={printed:8s} corrected={corrected}")
