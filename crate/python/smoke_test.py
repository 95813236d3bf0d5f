"""Smoke test for the statesum_py extension.

Build it first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`.
"""

import json
import sys

import statesum_py


def value(report):
    return json.loads(report)["value"]


def main():
    checks = [
        ("tv Z/2 s3_2tet", value(statesum_py.tv("builtin:s3_2tet")), "1/2"),
        ("tv Z/2 rp3", value(statesum_py.tv("builtin:rp3")), "1"),
        ("st Z/3 s2xs1", value(statesum_py.st("builtin:s2xs1", group="cyclic:3")), "1"),
    ]
    per = json.loads(statesum_py.st("builtin:s3_2tet", per_phi3=True))
    checks.append(("partial sums equal", per["partial_sums_equal"], True))
    try:
        statesum_py.tv("builtin:nope")
        checks.append(("bad manifold rejected", False, True))
    except ValueError:
        checks.append(("bad manifold rejected", True, True))
    ok = True
    for name, got, want in checks:
        status = "PASS" if got == want else "FAIL"
        ok &= got == want
        print(f"{status} {name}: {got}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
