"""Write, check and pretty-print properties in the WALTZ notation.

Run with ``python3 demos/02_writing_properties.py``.
"""

from waltzrv.lang import ParseError, WellFormednessError, check_well_formed, parse, print_formula

# A property has a modal wrapper (omega: every context, theta: some context)
# around a chain of send signatures.  Each signature carries a payload pattern
# and a constraint over the variables bound so far.
source = """
omega(
  send main -> add {process, _, Number1} : true ;      # the request entering add
  send add -> mult {process, Number2} : Number2 = Number1 + 10
)
"""
phi = parse(source)
check_well_formed(phi)
print("canonical form:\n ", print_formula(phi))
print("round-trips:", parse(print_formula(phi)) == phi)

# Mistakes are reported with a position, or with the well-formedness rule broken.
for broken in [
    "omega( send main -> add {process, N} )",
    "send main -> add {process, N} : true",
    "omega( send main -> add {process, N} : M > N )",
    "omega( send main -> add {process, N, N} : true )",
    "omega( theta( send a -> b {x} : true ) )",
]:
    try:
        check_well_formed(parse(broken))
    except (ParseError, WellFormednessError) as exc:
        print(f"\n{broken}\n  -> {type(exc).__name__}: {exc}")
