"""The universal tensor T1 commutes with H for arbitrary V0 and V1.

Run: python demos/universal_tensor.py
"""
from spinorbit import catalog as C
from spinorbit import determining as D

print("T1^12 =", C.get_integral("T1").build(1, 2).quantum().render())
rep = D.check_commutation("symbolic", "T1")
print(rep.query, "->", rep.status)
print("isotropic shift constant:", D.t1_delta_constant().render())
