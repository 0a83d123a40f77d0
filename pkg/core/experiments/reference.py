"""
Published reference values, keyed by the reproduction target they check.

Minimum distances are for P_o = 10 and a single RGB LED.
"""

PROFILES = ("balanced", "unbalanced", "extreme")

# MED with identical per-LED PAPR caps, keyed (alpha, profile); target table1
TABLE1_MED = {
    (1.5, "balanced"): 3.54, (1.5, "unbalanced"): 3.40, (1.5, "extreme"): 2.84,
    (2.0, "balanced"): 6.67, (2.0, "unbalanced"): 5.58, (2.0, "extreme"): 4.38,
    (4.0, "balanced"): 7.07, (4.0, "unbalanced"): 7.26, (4.0, "extreme"): 6.31,
    (6.0, "balanced"): 7.27, (6.0, "unbalanced"): 7.26, (6.0, "extreme"): 6.31,
}

# MED in the SVD design space, keyed (eps, profile); target table3
TABLE3_MED = {
    (0.0, "balanced"): 7.2727, (0.0, "unbalanced"): 7.2590, (0.0, "extreme"): 6.3139,
    (0.05, "balanced"): 6.7621, (0.05, "unbalanced"): 6.6748, (0.05, "extreme"): 5.9275,
    (0.1, "balanced"): 6.3275, (0.1, "unbalanced"): 6.1464, (0.1, "extreme"): 5.5657,
    (0.15, "balanced"): 5.9462, (0.15, "unbalanced"): 5.7769, (0.15, "extreme"): 5.1635,
    (0.2, "balanced"): 5.5670, (0.2, "unbalanced"): 5.3692, (0.2, "extreme"): 4.7727,
}

# Average bit errors per symbol error at 5 dB; target table2
TABLE2_BITS_PER_SYMBOL_ERROR = {"bsa": 1.33, "random-mean": 1.73}

# Share of multi-start runs reaching a satisfactory MED; target fig4
FIG4_NEAR_BEST_FRACTION = 0.25

# Printed optimized constellations, one (r, g, b) row per symbol
BALANCED_8 = (
    (0.0, 14.5455, 0.0),
    (0.0, 0.0, 14.5455),
    (0.0, 7.2727, 0.0),
    (4.8485, 4.8485, 4.8485),
    (0.0, 0.0, 0.0),
    (0.0, 0.0, 7.2727),
    (14.5455, 0.0, 0.0),
    (7.2727, 0.0, 0.0),
)

UNBALANCED_8 = (
    (0.0, 6.4859, 3.2598),
    (7.2590, 0.0, 7.2589),
    (14.5550, 0.0, 0.0),
    (0.0, 12.9718, 0.0),
    (6.4454, 7.2090, 0.0),
    (0.0, 0.0, 7.2590),
    (7.2960, 0.0, 0.0),
    (0.0, 0.0, 0.0),
)

EXTREME_8 = (
    (12.6277, 0.0, 0.0),
    (0.0, 0.0, 0.0),
    (0.0, 6.3139, 0.0),
    (6.3139, 0.0, 0.0),
    (9.0584, 0.0, 5.6861),
    (0.0, 0.0, 6.3139),
    (9.0584, 5.6861, 0.0),
    (18.9416, 0.0, 0.0),
)

# Optimized labeling of BALANCED_8 at 5 dB: (point, word)
BALANCED_8_LABELING = (
    ((0.0, 0.0, 7.2727), 0b000),
    ((0.0, 0.0, 0.0), 0b001),
    ((0.0, 14.5455, 0.0), 0b010),
    ((0.0, 7.2727, 0.0), 0b011),
    ((0.0, 0.0, 14.5455), 0b100),
    ((7.2727, 0.0, 0.0), 0b101),
    ((14.5455, 0.0, 0.0), 0b110),
    ((4.8485, 4.8485, 4.8485), 0b111),
)
