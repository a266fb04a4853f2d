"""Deterministic test assets: a static mini-portal that mimics a searchable
literature database (filter form, paginated result list, detail pages with
editors and an acquisition id), a synthetic TREC-style collection generator,
and a harvest-record builder for join experiments.

The portal is pure construction - no randomness - so regenerating it is
byte-identical.  Every href is relative, which makes the list/detail part
browsable from a ``file://`` base too; the search form needs query-string
URLs, which ``seed_cache`` maps into a fetch cache so full runs work in
replay-only mode without any network.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from urllib.parse import urljoin

from .enrich import CollectionDoc, write_collection
from .errors import InvalidSpec
from .extraction import ExtractionTree
from .fetcher import FetchResult, write_cache_entry

DEFAULT_BASE_URL = "http://solis.fixture/"

_EDITORS = [
    ("Doe", "J"), ("Roe", "M"), ("Poe", "A"), ("Noe", "K"), ("Bell", "R"),
    ("Kahn", "S"), ("Lenz", "T"), ("Wirth", "U"), ("Adler", "V"), ("Brandt", "H"),
]
_TOPICS = [
    "Social mobility", "Labour markets", "Family policy", "Urban migration",
    "Education equity", "Civic participation", "Demographic change", "Media usage",
]
_CITIES = ["Berlin", "Köln", "Hamburg", "München", "Leipzig", "Bremen", "Mannheim", "Jena"]
_PUBLISHERS = ["Nomos", "Campus", "Springer VS", "Transcript", "De Gruyter", "Beltz"]
_METHODS = ["survey", "interview", "panel", "secondary-analysis"]
_KEYWORDS = ["armut", "bildung", "familie", "migration", "arbeit", "medien",
             "gesundheit", "altern", "stadt", "wahlverhalten"]


@dataclass
class PortalSpec:
    pages: int = 3
    records_per_page: int = 4
    editors_per_record: int = 2
    id_scheme: str = "de24{:05d}"
    chain: str = "text"  # "text": <a>Next</a>; "rel": <a rel="next">More</a>
    base_url: str = DEFAULT_BASE_URL


def _issn(i: int) -> str:
    digits = f"{1000 + i % 9000:04d}{100 + (i * 7) % 900:03d}"
    total = sum((8 - pos) * int(d) for pos, d in enumerate(digits))
    check = (11 - total % 11) % 11
    return f"{digits[:4]}-{digits[4:]}{'X' if check == 10 else check}"


def _isbn13(i: int) -> str:
    body = f"978{i + 1:09d}"
    total = sum((1 if pos % 2 == 0 else 3) * int(d) for pos, d in enumerate(body))
    return body + str((10 - total % 10) % 10)


def _editor_name(index: int) -> str:
    last, initial = _EDITORS[index % len(_EDITORS)]
    return f"{last}, {initial}."


def _record_data(spec: PortalSpec, index: int) -> dict:
    rid = spec.id_scheme.format(index + 1)
    editors = [_editor_name(index * spec.editors_per_record + j)
               for j in range(spec.editors_per_record)]
    first = 7 + 3 * index
    return {
        "id": rid,
        "editors": editors,
        "fields": {
            "title": f"{_TOPICS[index % len(_TOPICS)]}: study {index + 1}",
            "issn": _issn(index),
            "isbn": _isbn13(index),
            "location": _CITIES[index % len(_CITIES)],
            "publisher": _PUBLISHERS[index % len(_PUBLISHERS)],
            "pages": f"{first}-{first + 14 + index % 9}",
        },
        "detail_url": urljoin(spec.base_url, f"record_{rid}.html"),
        "language": ["de", "en"][index % 2],
        "pubyear": str(1990 + index % 30),
    }


def _index_page() -> str:
    return """<html>
<head><title>Fixture literature portal</title></head>
<body>
<h1>Literature portal</h1>
<form action="results" method="get">
  <label>Database
    <select name="db">
      <option value="ALL" selected>All databases</option>
      <option value="SOLIS">SOLIS</option>
    </select>
  </label>
  <input type="submit" value="Search">
</form>
</body>
</html>
"""


def _list_page(spec: PortalSpec, page: int, records: list[dict]) -> str:
    items = []
    for rec in records:
        items.append(
            f'  <li><div class="result">'
            f'<h3><a class="title" href="record_{rec["id"]}.html">{rec["fields"]["title"]}</a></h3>'
            f'<span class="year">{rec["pubyear"]}</span>'
            f"</div></li>"
        )
    if page < spec.pages:
        if spec.chain == "rel":
            pager = f'<a rel="next" class="next" href="results_SOLIS_p{page + 1}.html">More</a>'
        else:
            pager = f'<a class="next" href="results_SOLIS_p{page + 1}.html">Next</a>'
    else:
        pager = "End of results"
    body = "\n".join(items)
    return f"""<html>
<head><title>SOLIS results, page {page}</title></head>
<body>
<h1>Results from SOLIS</h1>
<ol class="results">
{body}
</ol>
<p class="pager">Page {page} of {spec.pages} {pager}</p>
</body>
</html>
"""


def _detail_page(rec: dict) -> str:
    editors = "; ".join(f'<span class="editor">{name}</span>' for name in rec["editors"])
    f = rec["fields"]
    return f"""<html>
<head><title>{f["title"]}</title></head>
<body>
<article class="record">
<h1 class="title">{f["title"]}</h1>
<dl class="fields">
  <dt>Editors</dt><dd>{editors}</dd>
  <dt>ISSN</dt><dd><span class="issn">{f["issn"]}</span></dd>
  <dt>ISBN</dt><dd><span class="isbn">{f["isbn"]}</span></dd>
  <dt>Location</dt><dd><span class="location">{f["location"]}</span></dd>
  <dt>Publisher</dt><dd><span class="publisher">{f["publisher"]}</span></dd>
  <dt>Pages</dt><dd><span class="pages">{f["pages"]}</span></dd>
  <dt>Language</dt><dd><span class="language">{rec["language"]}</span></dd>
  <dt>Year</dt><dd><span class="year">{rec["pubyear"]}</span></dd>
  <dt>Acquisition id</dt><dd><code class="acqid">{rec["id"]}</code></dd>
</dl>
</article>
</body>
</html>
"""


def generate_portal(spec: PortalSpec, out_dir: str | Path) -> dict:
    """Write the portal's HTML files plus ``manifest.json`` and return the
    manifest.  The manifest's ``records`` list is the ground truth a
    reference wrapper run must reproduce exactly; ``urls`` maps every
    URL path the portal serves (including the search form's query URL)
    to the file that answers it."""
    if spec.pages < 1:
        raise InvalidSpec("a portal needs at least one result page")
    if spec.records_per_page < 0 or spec.editors_per_record < 0:
        raise InvalidSpec("record and editor counts cannot be negative")
    if spec.chain not in ("text", "rel"):
        raise InvalidSpec(f"unknown chain style {spec.chain!r}")

    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    records = [_record_data(spec, i)
               for i in range(spec.pages * spec.records_per_page)]

    files: dict[str, str] = {"index.html": _index_page()}
    urls: dict[str, str] = {"": "index.html", "index.html": "index.html",
                            "results?db=SOLIS": "results_SOLIS_p1.html"}
    for page in range(1, spec.pages + 1):
        name = f"results_SOLIS_p{page}.html"
        chunk = records[(page - 1) * spec.records_per_page:
                        page * spec.records_per_page]
        files[name] = _list_page(spec, page, chunk)
        urls[name] = name
    for rec in records:
        name = f"record_{rec['id']}.html"
        files[name] = _detail_page(rec)
        urls[name] = name

    for name, content in sorted(files.items()):
        (directory / name).write_text(content, encoding="utf-8")

    manifest = {
        "base_url": spec.base_url,
        "spec": asdict(spec),
        "urls": urls,
        "records": [{k: rec[k] for k in ("id", "editors", "fields", "detail_url")}
                    for rec in records],
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return manifest


def load_manifest(portal_dir: str | Path) -> dict:
    return json.loads((Path(portal_dir) / "manifest.json").read_text("utf-8"))


def seed_cache(portal_dir: str | Path, cache_dir: str | Path) -> int:
    """Populate a fetch cache with every URL the portal serves, so wrapper
    runs against it succeed in replay-only mode.  Returns the entry count."""
    manifest = load_manifest(portal_dir)
    base = manifest["base_url"]
    count = 0
    for path, filename in manifest["urls"].items():
        url = urljoin(base, path)
        content = (Path(portal_dir) / filename).read_bytes()
        write_cache_entry(cache_dir, "GET", url, None,
                          FetchResult(content, url, 200, "text/html"))
        count += 1
    return count


# --- synthetic collection -------------------------------------------------------

def generate_collection(n_docs: int, match_fraction: float, seed: int,
                        out_path: str | Path,
                        keys: list[str] | None = None) -> list[str]:
    """Write ``n_docs`` TREC-style documents of which exactly
    ``round(n_docs * match_fraction)`` carry DOCIDs that normalize to the
    returned key list; the rest are project-description-style documents
    whose ids never match.  Deterministic for a given seed."""
    if not 0 <= match_fraction <= 1:
        raise InvalidSpec("match fraction must be within [0, 1]")
    matchable = round(n_docs * match_fraction)
    if keys is None:
        keys = [f"de24{i + 1:05d}" for i in range(matchable)]
    elif len(keys) != matchable:
        raise InvalidSpec(
            f"need exactly {matchable} keys for n={n_docs}, fraction={match_fraction}")

    rng = random.Random(seed)
    matched_positions = set(rng.sample(range(n_docs), matchable)) if n_docs else set()
    docs: list[CollectionDoc] = []
    key_iter = iter(keys)
    for position in range(n_docs):
        if position in matched_positions:
            docid = f"GIRT-{next(key_iter).upper()}"
        else:
            docid = f"GIRT-PR{position + 1:06d}"
        docs.append(_synthetic_doc(docid, rng))
    write_collection(docs, out_path)
    return list(keys)


def _synthetic_doc(docid: str, rng: random.Random) -> CollectionDoc:
    doc = CollectionDoc(docid)
    topic = rng.choice(_TOPICS)
    doc.add("author", _editor_name(rng.randrange(len(_EDITORS))))
    if rng.random() < 0.5:
        doc.add("author", _editor_name(rng.randrange(len(_EDITORS))))
    doc.add("title", f"{topic} under changing conditions")
    doc.add("source", f"Zeitschrift für {topic}")
    doc.add("pubyear", str(rng.randrange(1990, 2020)))
    for keyword in rng.sample(_KEYWORDS, 2):
        doc.add("keywords", keyword)
    doc.add("class", f"{rng.choice('ABCDE')}{rng.randrange(100, 1000)}")
    doc.add("abstract", f"Examines {topic.lower()} with panel data.")
    doc.add("method", rng.choice(_METHODS))
    doc.add("language", rng.choice(["de", "en"]))
    doc.add("country", rng.choice(["DE", "AT", "CH"]))
    return doc


def build_harvest(keys: list[str], seed: int = 0,
                  extra_unmatched: int = 0) -> ExtractionTree:
    """A harvest tree with one record per key carrying the six join fields
    (editor x2, issn, isbn, location, publisher, pages) keyed by acq_id."""
    tree = ExtractionTree()
    rng = random.Random(seed)
    all_keys = list(keys) + [f"zz{n + 1:06d}" for n in range(extra_unmatched)]
    for key in all_keys:
        i = rng.randrange(100_000)
        record = tree.open_record("record", None, tree.root,
                                  source_url=f"http://solis.fixture/record_{key}.html")
        tree.open_record("acq_id", key, record)
        tree.open_record("editor", _editor_name(i), record)
        tree.open_record("editor", _editor_name(i + 3), record)
        tree.open_record("issn", _issn(i), record)
        tree.open_record("isbn", _isbn13(i), record)
        tree.open_record("location", _CITIES[i % len(_CITIES)], record)
        tree.open_record("publisher", _PUBLISHERS[i % len(_PUBLISHERS)], record)
        tree.open_record("pages", f"{i % 80 + 1}-{i % 80 + 18}", record)
    return tree
