"""
Validate symbol files before running estimators on them.

WHAT WE CHECK:
- File exists and is not empty
- Valid JSON with "u" and "phi" node trees
- Every node is well formed (op, args count, numeric fields)
- phi maps the disk into itself on the probe circle
- u evaluates on the probe circle
"""

import sys
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

# Add src to path for config import
sys.path.insert(0, str(Path(__file__).parent.parent.parent))
from config import PATHS

from bloch_wco.analytic_core import AnalyticExpr
from bloch_wco.errors import UnsupportedSymbol
from bloch_wco.harness.symbol_files import parse_symbol_file
from bloch_wco.nevanlinna import polynomial_coefficients


def count_nodes(expr: AnalyticExpr) -> int:
    return 1 + sum(count_nodes(op) for op in expr.operands)


def validate_symbol_file(file_path: Path) -> Tuple[bool, Optional[str], Optional[int], Optional[Dict]]:
    """
    Validate one symbol file.

    Args:
        file_path: Path to the .json symbol file

    Returns:
        Tuple of (is_valid, error_message, node_count, metadata)
    """
    file_path = Path(file_path)

    try:
        if not file_path.exists():
            return False, f"File does not exist: {file_path}", None, None

        if file_path.stat().st_size == 0:
            return False, "File is empty (0 bytes)", None, None

        pair = parse_symbol_file(file_path)

        try:
            coeffs = np.trim_zeros(np.asarray(polynomial_coefficients(pair.phi)), "b")
            degree = max(len(coeffs) - 1, 0)
        except UnsupportedSymbol:
            degree = None

        metadata = {
            "label": pair.label,
            "sup_modulus": pair.report.sup_modulus,
            "boundary_contact": pair.report.boundary_contact,
            "phi_degree": degree,
        }
        return True, None, count_nodes(pair.u) + count_nodes(pair.phi), metadata

    except Exception as e:
        return False, f"Validation error: {str(e)}", None, None


# =============================================================================
# CLI ENTRY POINT
# =============================================================================

if __name__ == "__main__":
    print("\n" + "=" * 60)
    print("Symbol File Validation")
    print("=" * 60 + "\n")

    corpus_dir = PATHS["corpus"]
    print(f"Scanning: {corpus_dir}\n")

    files = sorted(corpus_dir.glob("*.json"))

    if not files:
        print("No files found.")
    else:
        valid_count = 0
        contact_count = 0
        for file_path in files:
            is_valid, error, count, metadata = validate_symbol_file(file_path)
            if is_valid:
                contact = " | boundary contact" if metadata["boundary_contact"] else ""
                degree = metadata["phi_degree"]
                poly = f" | polynomial deg {degree}" if degree is not None else ""
                print(f"✓ {file_path.name}: {count} nodes, sup |phi| = {metadata['sup_modulus']:.9f}{contact}{poly}")
                valid_count += 1
                contact_count += bool(metadata["boundary_contact"])
            else:
                print(f"✗ {file_path.name}: {error}")

        print(f"\n{valid_count}/{len(files)} files valid")
        print(f"{contact_count} with boundary contact, {valid_count - contact_count} strict")

    print("\n" + "=" * 60 + "\n")
