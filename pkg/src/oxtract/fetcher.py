"""Page retrieval over http(s) and file URLs with caching and replay.

The cache makes runs reproducible offline: in ``replay-only`` mode a hit is
served from disk and a miss raises CacheMiss without ever touching the
network.  One file per entry, named by the SHA-256 hex digest of
``"METHOD url BODYDIGEST"``, holding a one-line JSON header (final URL,
status, content type) followed by the raw body bytes.  The directory
defaults to the ``OXTRACT_CACHE_DIR`` environment variable.

Network requests go through a pluggable transport that performs exactly one
HTTP exchange; redirect following (at most five hops), retries, per-host
politeness delays, and robots.txt checks live here so they behave the same
for every transport.  file:// URLs bypass cache, delays, and robots.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import urllib.error
import urllib.request
import urllib.robotparser
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urldefrag, urljoin, urlparse

from .errors import CacheMiss, FetchError, TooManyRedirects, UnresolvableHref

MAX_REDIRECTS = 5
_REDIRECT_STATUSES = (301, 302, 303, 307, 308)
_SUPPORTED_SCHEMES = ("http", "https", "file")

CACHE_DIR_ENV = "OXTRACT_CACHE_DIR"


def resolve(base: str, href: str) -> str:
    """Standard relative-reference resolution with the fragment stripped."""
    if urlparse(base).scheme not in _SUPPORTED_SCHEMES:
        raise UnresolvableHref(f"base URL is not absolute: {base!r}")
    target = urldefrag(urljoin(base, href.strip())).url
    if urlparse(target).scheme not in _SUPPORTED_SCHEMES:
        raise UnresolvableHref(f"cannot navigate to {href!r} from {base!r}")
    return target


@dataclass
class FetchPolicy:
    delay_s: float = 1.0
    max_retries: int = 2
    timeout_s: float = 30.0
    cache_mode: str = "off"  # off | read-write | replay-only
    cache_dir: str | None = None
    respect_robots: bool = True
    user_agent: str = "oxtract/0.1"

    def __post_init__(self) -> None:
        if self.cache_mode not in ("off", "read-write", "replay-only"):
            raise ValueError(f"unknown cache mode {self.cache_mode!r}")
        if self.delay_s < 0:
            raise ValueError("delay must be non-negative")


@dataclass
class FetchResult:
    content: bytes
    url: str  # final URL after redirects
    status: int = 200
    content_type: str = "text/html"


@dataclass
class Response:
    """One raw HTTP exchange as seen by a transport (no redirect following)."""

    status: int
    headers: dict[str, str]
    body: bytes


class UrllibTransport:
    """Real network transport; one request, redirects surfaced as 3xx."""

    def __init__(self) -> None:
        self._opener = urllib.request.build_opener(_NoRedirect())

    def request(self, method: str, url: str, body: bytes | None,
                headers: dict[str, str], timeout: float) -> Response:
        req = urllib.request.Request(url, data=body, headers=headers, method=method)
        try:
            with self._opener.open(req, timeout=timeout) as resp:
                return Response(resp.status, dict(resp.headers.items()), resp.read())
        except urllib.error.HTTPError as err:
            return Response(err.code, dict(err.headers.items()), err.read())
        except urllib.error.URLError as err:
            raise FetchError(url, str(err.reason))
        except OSError as err:
            raise FetchError(url, str(err))


class _NoRedirect(urllib.request.HTTPRedirectHandler):
    def redirect_request(self, req, fp, code, msg, headers, newurl):
        return None


class MappingTransport:
    """Serves canned responses from ``{(method, url): Response | bytes}``;
    used by tests and the fixture tooling for hermetic portals."""

    def __init__(self, responses: dict[tuple[str, str], Response | bytes]):
        self.responses = dict(responses)
        self.requests: list[tuple[str, str]] = []

    def request(self, method: str, url: str, body: bytes | None,
                headers: dict[str, str], timeout: float) -> Response:
        self.requests.append((method, url))
        entry = self.responses.get((method, url))
        if entry is None:
            raise FetchError(url, "no canned response")
        if isinstance(entry, bytes):
            return Response(200, {"Content-Type": "text/html; charset=utf-8"}, entry)
        return entry


# --- cache layout ---------------------------------------------------------

def cache_key(method: str, url: str, body: bytes | None) -> str:
    body_digest = hashlib.sha256(body or b"").hexdigest()
    return hashlib.sha256(f"{method} {url} {body_digest}".encode()).hexdigest()


def write_cache_entry(cache_dir: str | Path, method: str, url: str,
                      body: bytes | None, result: FetchResult) -> Path:
    directory = Path(cache_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / cache_key(method, url, body)
    header = json.dumps({"url": result.url, "status": result.status,
                         "content_type": result.content_type}).encode()
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(header + b"\n" + result.content)
    os.replace(tmp, path)
    return path


def read_cache_entry(cache_dir: str | Path, method: str, url: str,
                     body: bytes | None) -> FetchResult | None:
    path = Path(cache_dir) / cache_key(method, url, body)
    if not path.is_file():
        return None
    raw = path.read_bytes()
    head, _, content = raw.partition(b"\n")
    meta = json.loads(head)
    return FetchResult(content, meta["url"], meta["status"], meta["content_type"])


# --- fetcher ---------------------------------------------------------------

class _HostState:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.last_request = 0.0
        self.robots: urllib.robotparser.RobotFileParser | None = None


class Fetcher:
    """Shareable across concurrent runs; host pacing is serialized inside."""

    def __init__(self, policy: FetchPolicy | None = None, transport=None):
        self.policy = policy or FetchPolicy()
        self.transport = transport or UrllibTransport()
        self.request_log: list[tuple[str, float]] = []  # (host, monotonic time)
        self._hosts: dict[str, _HostState] = {}
        self._lock = threading.Lock()

    @property
    def cache_dir(self) -> str | None:
        return self.policy.cache_dir or os.environ.get(CACHE_DIR_ENV)

    def fetch(self, url: str, method: str = "GET",
              body: bytes | None = None) -> FetchResult:
        """Retrieve ``url``; follows at most five redirects.  The cache key
        is the original request, the stored entry the final response."""
        scheme = urlparse(url).scheme
        if scheme not in _SUPPORTED_SCHEMES:
            raise FetchError(url, f"unsupported scheme {scheme!r}")
        if scheme == "file":
            return self._fetch_file(url)

        mode = self.policy.cache_mode
        if mode != "off":
            directory = self.cache_dir
            if directory:
                hit = read_cache_entry(directory, method, url, body)
                if hit is not None:
                    return hit
            if mode == "replay-only":
                raise CacheMiss(url)

        result = self._fetch_network(url, method, body)
        if mode == "read-write" and self.cache_dir:
            write_cache_entry(self.cache_dir, method, url, body, result)
        return result

    # --- internals ---

    def _fetch_file(self, url: str) -> FetchResult:
        parsed = urlparse(url)
        path = urllib.request.url2pathname(parsed.path)
        try:
            content = Path(path).read_bytes()
        except OSError as err:
            raise FetchError(url, str(err))
        return FetchResult(content, url)

    def _fetch_network(self, url: str, method: str,
                       body: bytes | None) -> FetchResult:
        current_url, current_method, current_body = url, method, body
        for _ in range(MAX_REDIRECTS + 1):
            response = self._one_request(current_url, current_method, current_body)
            if response.status in _REDIRECT_STATUSES:
                location = _header(response.headers, "location")
                if location is None:
                    raise FetchError(current_url, f"redirect {response.status} without Location")
                current_url = resolve(current_url, location)
                if response.status in (301, 302, 303):
                    current_method, current_body = "GET", None
                continue
            if response.status >= 400:
                raise FetchError(current_url, f"HTTP {response.status}")
            content_type = _header(response.headers, "content-type") or "text/html"
            return FetchResult(response.body, current_url, response.status,
                               content_type.split(";")[0].strip())
        raise TooManyRedirects(url, MAX_REDIRECTS)

    def _one_request(self, url: str, method: str, body: bytes | None) -> Response:
        host = urlparse(url).netloc
        headers = {"User-Agent": self.policy.user_agent}
        if method == "POST" and body is not None:
            headers["Content-Type"] = "application/x-www-form-urlencoded"
        self._await_turn(host)
        if self.policy.respect_robots and not self._robots_allow(url, host):
            raise FetchError(url, "blocked by robots.txt")
        attempts = self.policy.max_retries + 1
        for attempt in range(attempts):
            try:
                return self.transport.request(method, url, body, headers,
                                              self.policy.timeout_s)
            except FetchError:
                if attempt + 1 == attempts:
                    raise
                time.sleep(self.policy.delay_s)
                self._note_request(host)
        raise AssertionError("unreachable")

    def _host_state(self, host: str) -> _HostState:
        with self._lock:
            return self._hosts.setdefault(host, _HostState())

    def _await_turn(self, host: str) -> None:
        state = self._host_state(host)
        with state.lock:  # serializes same-host requests only
            now = time.monotonic()
            wait = state.last_request + self.policy.delay_s - now
            if state.last_request and wait > 0:
                time.sleep(wait)
                now = time.monotonic()
            state.last_request = now
            with self._lock:
                self.request_log.append((host, now))

    def _note_request(self, host: str) -> None:
        state = self._host_state(host)
        with state.lock:
            state.last_request = time.monotonic()
            with self._lock:
                self.request_log.append((host, state.last_request))

    def _robots_allow(self, url: str, host: str) -> bool:
        state = self._host_state(host)
        parser = state.robots
        if parser is None:
            parser = urllib.robotparser.RobotFileParser()
            robots_url = resolve(url, "/robots.txt")
            try:
                response = self.transport.request(
                    "GET", robots_url, None,
                    {"User-Agent": self.policy.user_agent}, self.policy.timeout_s)
            except FetchError:
                response = None
            if response is None or response.status >= 400:
                parser.allow_all = True
            else:
                parser.parse(response.body.decode("utf-8", "replace").splitlines())
            state.robots = parser
        return parser.can_fetch(self.policy.user_agent, url)


def _header(headers: dict[str, str], name: str) -> str | None:
    for key, value in headers.items():
        if key.lower() == name:
            return value
    return None
