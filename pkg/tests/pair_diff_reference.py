"""Delta lists reproducing the reference preprint-vs-published summary rows.

Only the aggregates are known. Each list is one integer reconstruction:
pair count, increase/decrease counts, two-decimal mean and three-decimal
population SD all round to the reference row.
"""

MANUAL = [1, 1, 2, 3] + [-1] * 5 + [-2] * 2 + [0] * 89
# sum of squares 343 needs an odd delta sum (x^2 and x share parity)
AUTOMATED = [1] * 33 + [-1] * 67 + [-9] * 3 + [0] * 395

REFERENCE_ROWS = [
    {"evaluation": "Manual", "pairs": 100, "increased": 4, "decreased": 7, "mean": "-0.02", "sd": "0.529"},
    {"evaluation": "Automated", "pairs": 498, "increased": 33, "decreased": 70, "mean": "-0.12", "sd": "0.821"},
]
