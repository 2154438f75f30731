"""Tabulate the six reference discussion models: transfer function, L+T and predicted sizes."""

from discdyn.identify import characteristic_time, predict_count_at
from discdyn.response_models import FopdtModel, format_transfer_function

REFERENCE = [
    ("Wikipedia decline", FopdtModel(27, 5, 1)),
    ("reference titles, Feb 2010", FopdtModel(23, 5.5, 0.5)),
    ("ISTL article", FopdtModel(16, 2.5, 2.5)),
    ("ACS Pubs authors", FopdtModel(17, 2.5, 13.1)),
    ("SciFinder piracy", FopdtModel(36, 2.5, 1.5, "day")),
    ("Handbook 92nd edition", FopdtModel(16, 1.5, 0.3, "day")),
]

if __name__ == "__main__":
    print(f"{'discussion':<28}{'model':<28}{'unit':<6}{'L+T':>6}{'y(L+T)':>8}{'y(2(L+T))':>11}")
    for name, m in REFERENCE:
        tc = characteristic_time(m)
        print(
            f"{name:<28}{format_transfer_function(m).text:<28}{m.time_unit:<6}{tc:>6.2f}"
            f"{predict_count_at(m, tc).expected:>8.2f}{predict_count_at(m, 2 * tc).expected:>11.2f}"
        )
