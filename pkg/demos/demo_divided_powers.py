"""A tour of the truncated divided power algebra.

The algebra O(F) is determined by a prime p and heights (m_1, ..., m_n): it
has basis x_1^(a_1)...x_n^(a_n) with a_i < p^{m_i} and the multiplication
rule x^(r) x^(s) = C(r+s, r) x^(r+s).  This script walks through the
arithmetic, divided powers, the exponential and the C_k membership windows.
"""
from charpforms.algebra import (AlgebraElement, FlagSpec, OutOfAlgebraError,
                                render_element)

spec = FlagSpec(p=3, heights=(2, 1))
print(f"p = {spec.p}, heights = {spec.heights}, dim O(F) = {spec.dim}")

x1 = AlgebraElement.generator(spec, 0)
x2 = AlgebraElement.generator(spec, 1)

# the binomial relation in action
print("\nx1 * x1          =", render_element(x1 * x1))        # 2*x1^(2)
print("x1 * x1^(2)      =", render_element(x1 * AlgebraElement.monomial(spec, (2, 0))))
print("x1^(1) * x1^(2)  = C(3,1) x1^(3) = 0 + 0*...:",
      render_element(AlgebraElement.monomial(spec, (1, 0)) *
                     AlgebraElement.monomial(spec, (2, 0))))

# divided powers of a sum expand binomially
f = x1 + x2
print("\n(x1 + x2)^(2)    =", render_element(f.divided_power(2)))

# powers that leave the algebra are reported, not truncated
try:
    x2.divided_power(3)
except OutOfAlgebraError as ex:
    print("x2^(3) escapes   ->", ex)

# the exponential of anything in m^2 is a unit with inverse exp(-f)
g = AlgebraElement.monomial(spec, (1, 1))   # x1 x2
eg = g.exp_interior()
print("\nexp(x1 x2)       =", render_element(eg))
print("exp(f) exp(-f)   =", render_element(eg * (-g).exp_interior()))

# C_k windows: x1 has height 2, so x1 is in C_1 but x1^(3) is not
print("\nx1 in C_1?       ", x1.in_C_k(1))
print("x1 in C_2?       ", x1.in_C_k(2))
print("x1^(3) in C_1?   ", AlgebraElement.monomial(spec, (3, 0)).in_C_k(1))

# units invert by a geometric series
u = AlgebraElement.one(spec) + x1
print("\n(1 + x1)^{-1}    =", render_element(u.invert_unit()))
print("check: product   =", render_element(u * u.invert_unit()))
