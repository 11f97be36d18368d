"""KdV travelling waves, step by step: poles, Laurent series, subequation, closed form."""

from briotbouquet.arith import render
from briotbouquet.closed_forms import integrate_genus1
from briotbouquet.curves import PlaneCurve, genus
from briotbouquet.ode import parse_ode
from briotbouquet.singular import fuchs_indices, laurent_expand, leading_orders
from briotbouquet.subeq import SubeqTemplate, assemble_system, solve_branches
from briotbouquet.verify import verify_exact, verify_numeric

ode = parse_ode("u3 - (6/a)*u0*u1", "a != 0")
print("ODE:", ode, "= 0")

[family] = leading_orders(ode)
print("pole family:", family.render())
print("indicial polynomial:", fuchs_indices(family, ode).render())

series = laurent_expand(family, ode, 11)
for k, c in enumerate(series.coefficients()):
    print(f"  u_{k} = {render(c)}")

template = SubeqTemplate.for_families([series])
system = assemble_system(template, [series])
print("\nlinear rows:")
for row in system.rows[:7]:
    print(f"  F_{row.j}: {row.render()} = 0")

[branch] = solve_branches(system).branches
print("\nsubequation:", branch.subeq, "= 0")
curve = PlaneCurve.from_subeq(branch.subeq, {"a": 1, "U4": 2, "U6": 3})
print("genus at a=1, U4=2, U6=3:", genus(curve))

[form] = integrate_genus1(branch.subeq, 2)
print("closed form:", form.render())
print("exact check on the ODE:", verify_exact(form, ode).exact_ok)
print("numeric residual:", verify_numeric(form, ode).numeric_max_residual)
