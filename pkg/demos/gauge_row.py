"""A printed pseudo-tensor fails on row 6, and its self-adjoint part commutes.

Run: python demos/gauge_row.py
"""
from spinorbit import determining as D

for ident in ("Y1", "Y1-sa"):
    rep = D.check_commutation("6", ident)
    print(f"{rep.query}: {rep.status}, failing components {rep.failing()}")
print("trace of Y1-sa:", D.trace("Y1-sa").render())
