"""Wrapper execution: actions, pagination, page buffering, record streaming.

Action semantics are defined directly on the DOM - no scripting, no
rendering.  A click resolves against the nearest ancestor-or-self link
(fetching its href) or submit control (serializing and submitting its
form); ``{"text"}`` fills a form field in place; ``{submit}`` submits the
enclosing form.  dblclick behaves like click here.  A *contextual* action
(no trailing ``/``) leaves evaluation on the original page in the same
contexts, discarding any page the action produced; an *absolute* action
(``{click /}``) continues evaluation from the new page's root, once per
matched node in document order, restoring the buffered pre-action page
before moving to the next node (no re-fetch).

A repetition group yields iteration 0 (the untouched input), then applies
its body repeatedly.  The stream stops cleanly when the body produces no
contexts (e.g. no "Next" link on the last page) or the range maximum is
reached; exceeding ``limits.max_iterations`` raises IterationCapExceeded.
Inside a group body an absolute action continues from the first matched
node only (a loop body has a single continuation), and a nested group
contributes its final iteration.

Records stream to the sink as soon as their subtree can no longer grow;
pages are released as soon as no live context can reach them, which keeps
the number of buffered pages bounded by the active branch depth instead of
the length of the pagination chain.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator
from urllib.parse import urlencode, urlparse, urlunparse

from . import dom
from .errors import (
    IterationCapExceeded,
    NoActionTarget,
    OxtractError,
    PageLimitExceeded,
    RunAborted,
)
from .evaluator import EvalContext, eval_step
from .extraction import ExtractionTree, RecordNode
from .fetcher import Fetcher, resolve
from .oxlang.nodes import Action, KleeneGroup, PathItem, Step, WrapperAst

RecordSink = Callable[[RecordNode], None]

_SUBMIT_INPUT_TYPES = ("submit", "image")
_SKIP_INPUT_TYPES = ("submit", "image", "button", "reset", "file")


@dataclass
class Limits:
    max_iterations: int = 10_000
    max_pages: int | None = None


@dataclass
class ExecutionStats:
    pages_fetched: int = 0
    actions_performed: int = 0
    records_emitted: int = 0
    max_buffered_pages: int = 0
    wall_time_s: float = 0.0

    def as_dict(self) -> dict:
        return {
            "pages_fetched": self.pages_fetched,
            "actions_performed": self.actions_performed,
            "records_emitted": self.records_emitted,
            "max_buffered_pages": self.max_buffered_pages,
            "wall_time_s": round(self.wall_time_s, 6),
        }


@dataclass(eq=False)
class PageState:
    document: dom.DomDocument
    url: str
    form_values: dict[tuple[dom.DomNode | None, str], str] = field(default_factory=dict)
    depth: int = 0


# --- actions -----------------------------------------------------------------

def perform_action(action: Action, target: dom.DomNode, state: PageState,
                   fetcher: Fetcher, page_factory=None) -> PageState:
    """Apply one action to ``target``; returns the resulting page state
    (the same object for fills and for actions that do not navigate)."""
    factory = page_factory or _direct_page_factory(fetcher)
    if action.kind == "fill":
        return _fill(action, target, state)
    if action.kind in ("click", "dblclick"):
        node = target
        while node is not None:
            if node.kind == dom.ELEMENT and node.name == "a" and "href" in node.attrs:
                url = resolve(state.url, node.attrs["href"])
                return factory("GET", url, None, state.depth + (1 if action.absolute else 0))
            if _is_submit_control(node):
                form = _owning_form(node)
                if form is not None:
                    return _submit(form, node, action, state, factory)
            node = node.parent
        raise NoActionTarget(f"nothing to click at {target!r}")
    if action.kind == "submit":
        form = _owning_form(target)
        if form is None:
            raise NoActionTarget(f"no form around {target!r}")
        return _submit(form, None, action, state, factory)
    raise NoActionTarget(f"unknown action kind {action.kind!r}")


def _direct_page_factory(fetcher: Fetcher):
    def factory(method: str, url: str, body: bytes | None, depth: int) -> PageState:
        result = fetcher.fetch(url, method, body)
        return PageState(dom.parse_html(result.content, result.url), result.url,
                         depth=depth)
    return factory


def _fill(action: Action, target: dom.DomNode, state: PageState) -> PageState:
    if not (target.kind == dom.ELEMENT and target.name in dom.FORM_FIELD_TAGS):
        raise NoActionTarget(f"cannot fill non-field {target!r}")
    name = target.attrs.get("name")
    if not name:
        raise NoActionTarget(f"cannot fill unnamed field {target!r}")
    state.form_values[(_owning_form(target), name)] = action.text or ""
    return state


def _is_submit_control(node: dom.DomNode) -> bool:
    if node.kind != dom.ELEMENT:
        return False
    if node.name == "input":
        return node.attrs.get("type", "").lower() in _SUBMIT_INPUT_TYPES
    if node.name == "button":
        return node.attrs.get("type", "submit").lower() == "submit"
    return False


def _owning_form(node: dom.DomNode) -> dom.DomNode | None:
    while node is not None:
        if node.kind == dom.ELEMENT and node.name == "form":
            return node
        node = node.parent
    return None


def _submit(form: dom.DomNode, submitter: dom.DomNode | None, action: Action,
            state: PageState, factory) -> PageState:
    pairs = _form_pairs(form, submitter, state)
    target_url = resolve(state.url, form.attrs.get("action", ""))
    method = form.attrs.get("method", "get").lower()
    depth = state.depth + (1 if action.absolute else 0)
    if method == "post":
        return factory("POST", target_url, urlencode(pairs).encode("ascii"), depth)
    parts = urlparse(target_url)._replace(query=urlencode(pairs))
    return factory("GET", urlunparse(parts), None, depth)


def _form_pairs(form: dom.DomNode, submitter: dom.DomNode | None,
                state: PageState) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    for node in dom.axis_nodes(form, "descendant"):
        if node.kind != dom.ELEMENT or node.name not in dom.FORM_FIELD_TAGS:
            continue
        name = node.attrs.get("name")
        if not name:
            continue
        override = state.form_values.get((form, name))
        if node.name == "input":
            input_type = node.attrs.get("type", "text").lower()
            if input_type in _SKIP_INPUT_TYPES:
                continue
            if input_type in ("checkbox", "radio"):
                if "checked" in node.attrs:
                    pairs.append((name, node.attrs.get("value", "on")))
                continue
            pairs.append((name, override if override is not None
                          else node.attrs.get("value", "")))
        elif node.name == "textarea":
            pairs.append((name, override if override is not None
                          else dom.string_value(node)))
        elif node.name == "select":
            if override is not None:
                pairs.append((name, override))
                continue
            options = [n for n in dom.axis_nodes(node, "descendant")
                       if n.kind == dom.ELEMENT and n.name == "option"]
            chosen = next((o for o in options if "selected" in o.attrs),
                          options[0] if options else None)
            if chosen is not None:
                pairs.append((name, chosen.attrs.get("value", dom.string_value(chosen))))
    if submitter is not None and submitter.attrs.get("name"):
        pairs.append((submitter.attrs["name"], submitter.attrs.get("value", "")))
    return pairs


# --- execution ---------------------------------------------------------------

class Execution:
    """One wrapper run; strictly sequential.  Independent runs may share a
    Fetcher and run on separate threads."""

    def __init__(self, fetcher: Fetcher, limits: Limits | None = None,
                 sink: RecordSink | None = None):
        self.fetcher = fetcher
        self.limits = limits or Limits()
        self.sink = sink
        self.stats = ExecutionStats()
        self.tree = ExtractionTree()
        self._live_pages = 0
        self._pins: dict[int, int] = {}

    # --- page ledger ---

    def _fetch_page(self, method: str, url: str, body: bytes | None,
                    depth: int) -> PageState:
        if (self.limits.max_pages is not None
                and self.stats.pages_fetched >= self.limits.max_pages):
            raise PageLimitExceeded(self.limits.max_pages)
        result = self.fetcher.fetch(url, method, body)
        self.stats.pages_fetched += 1
        self._live_pages += 1
        self.stats.max_buffered_pages = max(self.stats.max_buffered_pages,
                                            self._live_pages)
        return PageState(dom.parse_html(result.content, result.url), result.url,
                         depth=depth)

    def _release_page(self, state: PageState) -> None:
        self._live_pages -= 1

    # --- record streaming ---

    def _pin(self, ctx: EvalContext) -> None:
        node = ctx.record_parent
        while node is not None:
            self._pins[id(node)] = self._pins.get(id(node), 0) + 1
            node = node.parent

    def _unpin(self, ctx: EvalContext) -> None:
        node = ctx.record_parent
        while node is not None:
            self._pins[id(node)] -= 1
            node = node.parent

    def _flush(self) -> None:
        """Emit the longest prefix of completed top-level records."""
        children = self.tree.root.children
        while children and self._pins.get(id(children[0]), 0) == 0:
            record = children.pop(0)
            record.parent = None
            self.stats.records_emitted += 1
            if self.sink is not None:
                self.sink(record)

    # --- actions with accounting ---

    def _do_action(self, action: Action, target: dom.DomNode,
                   state: PageState) -> PageState:
        new_state = perform_action(action, target, state, self.fetcher,
                                   page_factory=self._fetch_page)
        self.stats.actions_performed += 1
        return new_state

    # --- path walking ---

    def run(self, wrapper: WrapperAst) -> ExecutionStats:
        started = time.monotonic()
        try:
            state = self._fetch_page("GET", wrapper.url, None, depth=0)
            root_ctx = EvalContext(state.document.root, 1, 1, self.tree.root)
            self._walk(wrapper.path, [root_ctx], state)
            self._release_page(state)
            self._flush()
        except OxtractError as err:
            self.stats.wall_time_s = time.monotonic() - started
            raise RunAborted(err, self.stats) from err
        self.stats.wall_time_s = time.monotonic() - started
        return self.stats

    def _walk(self, items: list[PathItem], contexts: list[EvalContext],
              state: PageState) -> None:
        if not items or not contexts:
            return
        head, tail = items[0], items[1:]
        if isinstance(head, KleeneGroup):
            for iter_contexts, iter_state in self.run_kleene(head, contexts, state):
                self._walk(tail, iter_contexts, iter_state)
                self._flush()
            return
        out = eval_step(head, contexts, state, recorder=self.tree)
        action = head.action
        if action is None:
            self._walk(tail, out, state)
        elif action.absolute:
            for ctx in out:
                self._pin(ctx)
            try:
                for i, ctx in enumerate(out):
                    new_state = self._do_action(action, ctx.node, state)
                    try:
                        next_ctx = EvalContext(new_state.document.root, 1, 1,
                                               ctx.record_parent)
                        self._walk(tail, [next_ctx], new_state)
                    finally:
                        if new_state is not state:
                            self._release_page(new_state)
                    self._unpin(ctx)
                    out[i] = None  # released
                    self._flush()
            finally:
                for ctx in out:
                    if ctx is not None:
                        self._unpin(ctx)
        else:
            for ctx in out:
                produced = self._do_action(action, ctx.node, state)
                if produced is not state:
                    self._release_page(produced)  # contextual: page discarded
            self._walk(tail, out, state)

    def run_kleene(
        self,
        group: KleeneGroup,
        contexts: list[EvalContext],
        state: PageState,
        transfer_last: bool = False,
    ) -> Iterator[tuple[list[EvalContext], PageState]]:
        """Iteration stream for a repetition group.

        Yields ``(contexts, state)`` for every iteration index within the
        group's range, starting with iteration 0 = the untouched input.
        The cap check happens before a body application, so the cap-th
        iteration completes and the error fires in place of iteration
        cap+1 (the cap is a cycle guard, not a clean bound; use a range
        for that).  ``transfer_last=True`` leaves the final body-produced
        page alive for the caller (used when the group sits inside another
        group's body).
        """
        cap = self.limits.max_iterations
        applications = 0
        cur_contexts, cur_state = list(contexts), state
        owns_state = False
        for ctx in cur_contexts:
            self._pin(ctx)
        try:
            while True:
                if applications >= group.min_count:
                    yield cur_contexts, cur_state
                if group.max_count is not None and applications >= group.max_count:
                    return
                if applications + 1 > cap:
                    raise IterationCapExceeded(cap)
                new_contexts, new_state = self._walk_body(group.body,
                                                          cur_contexts, cur_state)
                if not new_contexts:
                    if new_state is not cur_state:
                        self._release_page(new_state)
                    return
                for ctx in new_contexts:
                    self._pin(ctx)
                for ctx in cur_contexts:
                    self._unpin(ctx)
                if new_state is not cur_state:
                    if owns_state:
                        self._release_page(cur_state)
                    owns_state = True
                cur_contexts, cur_state = new_contexts, new_state
                applications += 1
        finally:
            for ctx in cur_contexts:
                self._unpin(ctx)
            if owns_state and not transfer_last:
                self._release_page(cur_state)

    def _walk_body(self, items: list[PathItem], contexts: list[EvalContext],
                   state: PageState) -> tuple[list[EvalContext], PageState]:
        """Linear walk of a group body; returns its final contexts/state."""
        cur_contexts, cur_state = contexts, state
        owned: PageState | None = None
        for item in items:
            if not cur_contexts:
                break
            if isinstance(item, KleeneGroup):
                last = None
                for pair in self.run_kleene(item, cur_contexts, cur_state,
                                            transfer_last=True):
                    last = pair
                if last is None:
                    cur_contexts = []
                    break
                if last[1] is not cur_state:
                    if owned is not None:
                        self._release_page(owned)  # previous body-created page
                    owned = last[1]
                cur_contexts, cur_state = last
                continue
            out = eval_step(item, cur_contexts, cur_state, recorder=self.tree)
            action = item.action
            if action is None or not out:
                cur_contexts = out
                continue
            if action.absolute:
                lead = out[0]  # a loop body has one continuation
                new_state = self._do_action(action, lead.node, cur_state)
                if new_state is not cur_state:
                    if owned is not None:
                        self._release_page(owned)
                    owned = new_state
                cur_contexts = [EvalContext(new_state.document.root, 1, 1,
                                            lead.record_parent)]
                cur_state = new_state
            else:
                for ctx in out:
                    produced = self._do_action(action, ctx.node, cur_state)
                    if produced is not cur_state:
                        self._release_page(produced)
                cur_contexts = out
        return cur_contexts, cur_state


def execute(wrapper: WrapperAst, fetcher: Fetcher,
            sink: RecordSink | None = None,
            limits: Limits | None = None) -> ExecutionStats:
    """Run a wrapper end to end, streaming completed records to ``sink``.

    Raises RunAborted (carrying partial stats and the underlying cause) if
    any fetch, action, or limit error interrupts the run; records already
    handed to the sink are the partial output.
    """
    return Execution(fetcher, limits, sink).run(wrapper)


def run_kleene(group: KleeneGroup, state: PageState,
               contexts: list[EvalContext], limits: Limits,
               fetcher: Fetcher) -> Iterator[tuple[list[EvalContext], PageState]]:
    """Standalone iteration stream over an existing page state."""
    execution = Execution(fetcher, limits)
    execution._live_pages = 1  # the caller's page
    return execution.run_kleene(group, contexts, state)


def collect_records(wrapper: WrapperAst, fetcher: Fetcher,
                    limits: Limits | None = None) -> tuple[ExtractionTree, ExecutionStats]:
    """Convenience: run a wrapper and gather its records into a fresh tree."""
    tree = ExtractionTree()
    stats = execute(wrapper, fetcher, sink=tree.adopt, limits=limits)
    return tree, stats
