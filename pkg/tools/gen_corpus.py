"""Generate the synthetic classification corpus.

Each contract plants a known number of public, private and MPT functions
and is padded with straight-line arithmetic towards a target size. The
planted counts go to ``manifest.json`` and are what the tests compare the
checker against; nothing here consults the checker.

    python tools/gen_corpus.py [out_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

# name: (public, private, mpt, target LOC)
CONTRACTS = {
    "PowerGrid": (1, 1, 2, 25),
    "Bidding": (0, 2, 2, 44),
    "Scores": (0, 2, 4, 77),
    "Insurance": (2, 3, 3, 89),
    "ERC20Token": (4, 4, 3, 112),
    "YunDou": (10, 0, 4, 279),
    "Oracle": (19, 0, 3, 326),
    "HTLC": (31, 0, 8, 1029),
}

IND = "    "


def pad_lines(var: str, n: int, level: int = 2) -> list:
    return [f"{IND * level}{var} = {var} * {3 + i % 5} + {i + 1};" for i in range(n)]


def public_fn(i: int, pad: int) -> list:
    return ([f"{IND}function tally{i}(uint step) public returns (uint) {{",
             f"{IND * 2}uint acc = step;"]
            + pad_lines("acc", pad)
            + [f"{IND * 2}total = total + acc;",
               f"{IND * 2}return total;",
               f"{IND}}}"])


def private_fn(i: int, pad: int) -> list:
    if i % 2 == 0:
        return ([f"{IND}function stash{i}(uint amount) public {{",
                 f"{IND * 2}uint fee = amount / 100;"]
                + pad_lines("fee", pad)
                + [f"{IND * 2}vault[msg.sender] += amount - fee;",
                   f"{IND}}}"])
    return ([f"{IND}function peek{i}(uint bonus) public returns (uint @me seen) {{",
             f"{IND * 2}uint extra = bonus;"]
            + pad_lines("extra", pad)
            + [f"{IND * 2}seen = vault[msg.sender] + extra;",
               f"{IND}}}"])


def mpt_fn(i: int, pad: int) -> list:
    kind = i % 3
    if kind == 0:
        return ([f"{IND}function settle{i}(address payer, address payee, uint amount) public {{",
                 f"{IND * 2}uint fee = amount / 50;"]
                + pad_lines("fee", pad)
                + [f"{IND * 2}vault[payer] -= amount;",
                   f"{IND * 2}vault[payee] += amount - fee;",
                   f"{IND}}}"])
    if kind == 1:
        return ([f"{IND}function pool{i}(address[!m{i}] members, uint[@m{i}] shares) public "
                 "returns (uint sum) {",
                 f"{IND * 2}uint scale = 1;"]
                + pad_lines("scale", pad)
                + [f"{IND * 2}for (uint j = 0; j < members.length; j++) {{",
                   f"{IND * 3}sum = sum + reveal(shares[j], all);",
                   f"{IND * 2}}}",
                   f"{IND * 2}total = sum;",
                   f"{IND}}}"])
    return ([f"{IND}function pick{i}(address[!c{i}] bidders, uint[@c{i}] offers) public "
             "returns (address best, uint @best price) {",
             f"{IND * 2}uint rounds = 0;"]
            + pad_lines("rounds", pad)
            + [f"{IND * 2}best = bidders[0];",
               f"{IND * 2}price = reveal(offers[0], best);",
               f"{IND * 2}for (uint j = 1; j < bidders.length; j++) {{",
               f"{IND * 3}if (reveal(offers[j], all) < reveal(price, all)) {{",
               f"{IND * 4}best = bidders[j];",
               f"{IND * 4}price = reveal(offers[j], best);",
               f"{IND * 3}}}",
               f"{IND * 2}}}",
               f"{IND}}}"])


def contract_source(name: str, public: int, private: int, mpt: int, target: int) -> str:
    makers = ([(public_fn, k) for k in range(public)]
              + [(private_fn, k) for k in range(private)]
              + [(mpt_fn, k) for k in range(mpt)])
    head = [f"contract {name} {{",
            f"{IND}mapping(address !k => uint @k) vault;",
            f"{IND}uint @all total;"]
    base = sum(len(make(k, 0)) for make, k in makers) + len(head) + 1
    spare = max(0, target - base)
    n = max(1, len(makers))
    lines = list(head)
    for idx, (make, k) in enumerate(makers):
        pad = spare // n + (1 if idx < spare % n else 0)
        lines.append("")
        lines.extend(make(k, pad))
    lines.append("}")
    return "\n".join(lines) + "\n"


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, (public, private, mpt, target) in CONTRACTS.items():
        path = out / f"{name.lower()}.cloak"
        path.write_text(contract_source(name, public, private, mpt, target))
        manifest[name] = {"file": path.name, "public": public, "private": private, "mpt": mpt,
                          "target_loc": target}
    # SupplyChain is written by hand: Listing 1 plus five private functions
    manifest["SupplyChain"] = {"file": "supplychain.cloak", "public": 0, "private": 5, "mpt": 1,
                               "target_loc": 68}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "src" / "cloak" / "data" / "corpus"
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else default)
