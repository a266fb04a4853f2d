#!/usr/bin/env python3
"""Regenerate the checked-in fixture portal (fixtures/portal/).

The generator is deterministic, so running this twice in a row leaves the
tree unchanged; a test guards against drift between the generator and the
checked-in files.
"""

from pathlib import Path

from oxtract.fixtures import PortalSpec, generate_portal

REPO_ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    out_dir = REPO_ROOT / "fixtures" / "portal"
    manifest = generate_portal(PortalSpec(), out_dir)
    print(f"wrote {len(manifest['urls'])} portal URLs and "
          f"{len(manifest['records'])} records to {out_dir}")


if __name__ == "__main__":
    main()
