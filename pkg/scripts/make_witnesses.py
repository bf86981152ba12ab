"""Regenerate the committed counterexample witnesses in src/qlaws/corpus.

For each non-law and each side-condition necessity check, the first seeded
instance is written as a pair of program files plus a library file holding
the synthesized measurements and gates, and summarized in witnesses.json.
"""

import json
from pathlib import Path

from qlaws.cli.printer import show_file
from qlaws.laws.nonlaws import NECESSITY, NONLAWS, necessity_witness, search_nonlaw
from qlaws.library import Library

CORPUS = Path(__file__).resolve().parents[1] / "src" / "qlaws" / "corpus"
SEED = 42


def slug(name: str) -> str:
    return name.replace("necessity:", "nec_").replace("-", "_").lower()


def save(w) -> dict:
    base = slug(w.name)
    lib_name = f"{base}.lib.json"
    w.lib.extension_of(Library.standard()).dump(CORPUS / lib_name)
    (CORPUS / f"{base}.lhs.qp").write_text(show_file(w.lhs, [lib_name]))
    (CORPUS / f"{base}.rhs.qp").write_text(show_file(w.rhs, [lib_name]))
    return {"name": w.name, "lhs": f"{base}.lhs.qp", "rhs": f"{base}.rhs.qp", "library": lib_name,
            "seed": w.seed, "trial": w.trial, "residual": w.residual, "side_residual": w.side_residual}


def main():
    index = []
    for name in NONLAWS:
        w = search_nonlaw(name, seed=SEED)
        index.append(save(w))
    for law_id in NECESSITY:
        w = necessity_witness(law_id, seed=SEED)
        index.append(save(w))
    (CORPUS / "witnesses.json").write_text(json.dumps(index, indent=1) + "\n")
    for row in index:
        print(f"{row['name']:<28} trial {row['trial']:>3}  residual {row['residual']:.3e}")


if __name__ == "__main__":
    main()
