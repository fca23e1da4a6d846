"""Embedded benchmark evidence for the selector.

Measured at desk scale by scripts/freeze_registry_rows.py (5 seeds per
fingerprint, this package's own harness). Row format:
(n_samples, n_vars, corr_density, linear, gaussian, mean_f1, mean_runtime_s).
Regenerate with:  python3 scripts/freeze_registry_rows.py
"""

BENCHMARK_ROWS = {
    "direct_lingam": [
        (1000, 10, 0.533, True, True, 0.41, 0.168),
        (1000, 10, 0.84, True, True, 0.4, 0.166),
        (5000, 10, 0.529, True, False, 0.922, 0.299),
        (5000, 10, 0.267, True, False, 0.848, 0.319),
        (5000, 10, 0.844, True, False, 0.972, 0.314),
        (2000, 10, 0.342, False, True, 0.057, 0.233),
        (2000, 10, 0.227, False, True, 0.172, 0.221),
        (2000, 10, 0.751, False, True, 0.278, 0.253),
        (2000, 10, 0.116, False, False, 0.657, 0.23),
        (2000, 10, 0.756, False, False, 0.415, 0.239),
    ],
    "dynotears": [
        (1000, 10, 0.231, True, True, 0.766, 0.486),
        (1000, 10, 0.204, True, False, 0.765, 0.547),
        (2000, 5, 0.32, True, True, 0.847, 0.293),
        (2000, 5, 0.3, True, False, 0.829, 0.33),
    ],
    "granger_multivariate": [
        (1000, 10, 0.231, True, True, 0.765, 0.137),
        (1000, 10, 0.204, True, False, 0.741, 0.141),
        (2000, 5, 0.32, True, True, 0.394, 0.044),
        (2000, 5, 0.3, True, False, 0.399, 0.043),
    ],
    "granger_pairwise": [
        (1000, 10, 0.231, True, True, 0.664, 0.055),
        (1000, 10, 0.204, True, False, 0.644, 0.05),
        (2000, 5, 0.32, True, True, 0.499, 0.043),
        (2000, 5, 0.3, True, False, 0.469, 0.04),
    ],
    "iamb_cpdag": [
        (1000, 10, 0.533, True, True, 0.942, 0.173),
        (1000, 10, 0.84, True, True, 0.415, 0.342),
        (5000, 10, 0.529, True, False, 0.983, 0.18),
        (5000, 10, 0.267, True, False, 0.967, 0.149),
        (5000, 10, 0.844, True, False, 0.598, 0.433),
        (2000, 10, 0.342, False, True, 0.679, 0.207),
        (2000, 10, 0.227, False, True, 0.909, 0.174),
        (2000, 10, 0.751, False, True, 0.52, 0.436),
        (2000, 10, 0.116, False, False, 0.47, 0.163),
        (2000, 10, 0.756, False, False, 0.497, 0.403),
    ],
    "notears_linear": [
        (1000, 10, 0.533, True, True, 0.931, 0.788),
        (1000, 10, 0.84, True, True, 0.874, 1.778),
        (5000, 10, 0.529, True, False, 0.928, 1.761),
        (5000, 10, 0.267, True, False, 0.978, 1.049),
        (5000, 10, 0.844, True, False, 0.864, 3.506),
        (2000, 10, 0.342, False, True, 0.547, 1.21),
        (2000, 10, 0.227, False, True, 0.755, 0.808),
        (2000, 10, 0.751, False, True, 0.603, 1.541),
        (2000, 10, 0.116, False, False, 0.637, 0.914),
        (2000, 10, 0.756, False, False, 0.577, 1.703),
    ],
    "pc": [
        (1000, 10, 0.533, True, True, 0.884, 0.213),
        (1000, 10, 0.84, True, True, 0.437, 0.305),
        (5000, 10, 0.529, True, False, 0.961, 0.207),
        (5000, 10, 0.267, True, False, 0.942, 0.155),
        (5000, 10, 0.844, True, False, 0.571, 0.378),
        (2000, 10, 0.342, False, True, 0.63, 0.22),
        (2000, 10, 0.227, False, True, 0.921, 0.178),
        (2000, 10, 0.751, False, True, 0.489, 0.337),
        (2000, 10, 0.116, False, False, 0.662, 0.176),
        (2000, 10, 0.756, False, False, 0.482, 0.404),
    ],
    "score_search": [
        (1000, 10, 0.533, True, True, 0.822, 0.33),
        (1000, 10, 0.84, True, True, 0.535, 0.514),
        (5000, 10, 0.529, True, False, 0.78, 0.618),
        (5000, 10, 0.267, True, False, 0.832, 0.443),
        (5000, 10, 0.844, True, False, 0.573, 1.089),
        (2000, 10, 0.342, False, True, 0.689, 0.4),
        (2000, 10, 0.227, False, True, 0.835, 0.293),
        (2000, 10, 0.751, False, True, 0.466, 0.644),
        (2000, 10, 0.116, False, False, 0.723, 0.261),
        (2000, 10, 0.756, False, False, 0.51, 0.65),
    ],
    "var_lingam": [
        (1000, 10, 0.231, True, True, 0.691, 0.188),
        (1000, 10, 0.204, True, False, 0.71, 0.188),
        (2000, 5, 0.32, True, True, 0.623, 0.057),
        (2000, 5, 0.3, True, False, 0.76, 0.058),
    ],
}
