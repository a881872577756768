#!/usr/bin/env python3
"""Walk the three built-in structures through the full reduction pipeline.

For each system: verify the Jacobi identity on samples, evaluate the
Casimir and its gradient at a reference point, build the global chart,
and run the canonical-form check.  Prints one JSON document.

Usage: python3 scripts/darboux_demo.py [--samples N] [--seed S]
"""

import argparse
import json

import numpy as np

from poisson3d.builtin_systems import (
    EulerTopParams,
    circle_maps_structure,
    default_halphen_domain,
    euler_top_structure,
    halphen_structure,
)
from poisson3d.casimir import annihilation_residual, casimir_gradient, casimir_value
from poisson3d.darboux import build_chart, canonical_check, forward_map, reparam_factor
from poisson3d.verification import matrix_field_from_spec, verify_structure


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    systems = [
        ("halphen", halphen_structure(default_halphen_domain(((0.0, 5.0),) * 3)), (1.0, 2.0, 4.0)),
        ("circle-maps", circle_maps_structure(default_halphen_domain(((0.0, 5.0),) * 3)), (1.0, 2.0, 4.0)),
        ("euler-top", euler_top_structure(EulerTopParams(1.0, 2.0, 3.0)), (1.0, 1.0, 1.0)),
    ]
    out = []
    for name, spec, x_ref in systems:
        verify = verify_structure(
            matrix_field_from_spec(spec), spec.domain, args.samples, 1e-6, seed=args.seed
        )
        chart = build_chart(spec, k=3)
        y_ref = forward_map(chart, x_ref)
        canonical = canonical_check(chart, args.samples, seed=args.seed)
        out.append(
            {
                "system": name,
                "jacobi": verify.to_dict(),
                "reference_point": list(x_ref),
                "casimir_C3": casimir_value(spec, 3, x_ref),
                "gradient_C3": [float(g) for g in casimir_gradient(spec, 3, x_ref)],
                "annihilation_residual": annihilation_residual(spec, 3, x_ref),
                "chart_image": [float(v) for v in y_ref],
                "reparam_factor": reparam_factor(chart, y_ref),
                "canonical_check": canonical.to_dict(),
            }
        )
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
