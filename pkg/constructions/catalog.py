# constructions/catalog.py

from core.errors import ParameterError
from constructions import families as fam

FAMILY_CATALOG = [
    # --- CONSTRUCTION I (pairs with k_h < k/2) ---
    {"id": "thm3_1", "design": "3-(2v,5,3(v-2)(v-4)/4)", "conditions": "v = 2 (mod 6)",
     "params": ["v"], "ingredient": False,
     "build": lambda r, counts_only: fam.family_thm_3_1(r.v, with_filler=not counts_only)},
    {"id": "thm3_2", "design": "3-(2(2^f+1),5,15(2^f-1))", "conditions": "gcd(f,6) = 1, f > 1; filler file 3-(2^f+1,5,10(2^f-2))",
     "params": ["f"], "ingredient": True,
     "build": lambda r, counts_only: fam.family_thm_3_2(r.f, None if counts_only else r.ingredient)},
    {"id": "thm3_3", "design": "3-(2v,7,35v(v-2)(v-3)m/4)", "conditions": "v = 4,8,28,32,44,52 (mod 60), 1 <= m <= (v-1)/30",
     "params": ["v", "m"], "ingredient": False,
     "build": lambda r, counts_only: fam.family_thm_3_3(r.v, r.m)},

    # --- CONSTRUCTION II (a half pair with block size k/2) ---
    {"id": "thm3_4", "design": "3-(2(2^f+1),6,(2^f-1)lambda/2)", "conditions": "gcd(f,6) = 1, lambda in {10,60,70,90,100,150,160}; filler file 3-(2^f+1,6,lambda(2^f-2)/3)",
     "params": ["f", "lam"], "ingredient": True,
     "build": lambda r, counts_only: fam.family_thm_3_4(r.f, r.lam, None if counts_only else r.ingredient)},
    {"id": "gen2k", "design": "3-(2v,2k,k(v-2)Lambda/(2(v-k)))", "conditions": "gcd(v,k) = 1, v > 2k; filler file: simple 3-(v,2k,Lambda), Lambda/(2C(v-3,k-2)) integral and <= C(v-1,k-1)/k",
     "params": ["v", "k"], "ingredient": True,
     "build": lambda r, counts_only: fam.family_gen_2k(r.v, r.k, r.ingredient)},
    {"id": "cor2k", "design": "3-(2v,2k,k(v-2)C(v-3,2k-3)/(2(v-k)))", "conditions": "k=3: v = 1,4,5,8 (mod 12); k=4: v = 1,5,7,11,15,17 (mod 20); k=5: gcd(v,5)=1, v = 0,1,6,7 (mod 8), v = 0,1,2,6 (mod 7)",
     "params": ["v", "k"], "ingredient": False,
     "build": lambda r, counts_only: fam.family_cor_2k(r.v, r.k, with_filler=not counts_only)},
    {"id": "thm_ab", "design": "3-(2v,2(k+1),Theta*)", "conditions": "gcd(v,2k) = gcd(v,k+1) = 1, A/B integral, 1 <= z1 <= (v-1)/2, z1 A/B <= C(v-1,k)/(k+1)",
     "params": ["v", "k", "z1"], "ingredient": False,
     "build": lambda r, counts_only: fam.family_thm_AB(r.v, r.k, r.z1)},
    {"id": "cor_ab", "design": "k=3: 3-(2v,8,7v(v-2)(v-3)(v-5)m/30); k=4: 3-(2v,10,81v C(v-2,6) m/(7(v-5)))", "conditions": "k=3: v = 5,17,35,47 (mod 60); k=4: v = 7,23,63,111,167,191,223,231,247 (mod 280); 1 <= m <= (v-1)/2",
     "params": ["v", "k", "m"], "ingredient": False,
     "build": lambda r, counts_only: fam.family_cor_ab(r.v, r.k, r.m)},
]


def find_family(family_id):
    for entry in FAMILY_CATALOG:
        if entry["id"] == family_id:
            return entry
    known = ", ".join(e["id"] for e in FAMILY_CATALOG)
    raise ParameterError(f"unknown family '{family_id}' (known: {known})")


def build_family(request, counts_only=False):
    """Check the request carries every parameter its family needs, then build its ConstructionSpec."""
    entry = find_family(request.family)
    missing = [p for p in entry["params"] if getattr(request, p) is None]
    if missing:
        raise ParameterError(f"family {entry['id']} needs {', '.join('--' + p for p in missing)}")
    if entry["ingredient"] and request.ingredient is None and not (counts_only and entry["id"] != "gen2k"):
        raise ParameterError(f"family {entry['id']} needs an --ingredient design file")
    return entry["build"](request, counts_only)
