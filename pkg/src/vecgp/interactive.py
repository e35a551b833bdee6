"""Text-menu front end that pauses between generations."""

from __future__ import annotations

import sys
from typing import Callable, Optional, TextIO

from .compiler import compile_tree, format_plan, render_expression
from .core import Config
from .data import ColumnStore
from .errors import ConfigError
from .evolve import Evolution, RunResult

DISPLAY_MODES = ("silent", "minimal", "full", "debug", "timer")

MENU = """\
  c [N]        continue N generations (default: to the end)
  g N          set generation_max
  t N          set tournament size
  o R M C      set reproduction / mutation / crossover fractions
  d MODE       display mode: silent, minimal, full, debug, timer
  b            show the best tree
  p            show parameters
  q            quit (archive kept)"""


class _Display:
    def __init__(self, mode: str, out: TextIO):
        self.mode = mode
        self.out = out

    def say(self, text: str = "") -> None:
        print(text, file=self.out)

    def generation(self, evo: Evolution) -> None:
        stats = evo.history[-1]
        if self.mode == "silent":
            return
        if self.mode == "timer":
            self.say(f"gen {stats.generation:3d}  {stats.seconds:.4f} s")
            return
        self.say(f"gen {stats.generation:3d}  best {stats.best_fitness:g}  "
                 f"mean {stats.mean_fitness:g}")
        if self.mode == "full":
            for t in evo.population.trees:
                self.say(f"  {t.id:4d} d={t.depth} n={t.node_count:3d} "
                         f"f={t.fitness:g}  {render_expression(t)}")
        elif self.mode == "debug":
            plan = compile_tree(evo.best, evo.kernel, evo.store.feature_names)
            self.say(format_plan(plan))


def interactive_loop(config: Config, store: ColumnStore, *,
                     input_fn: Callable[[str], str] = input, out: Optional[TextIO] = None,
                     display: str = "minimal", archive: bool = True,
                     dataset_label: str = "") -> RunResult:
    """Run with a pause after each batch of generations.

    Any terminal failure (EOF, closed stream) drops into an unattended run to
    ``generation_max``, the same as server mode.
    """
    out = out or sys.stdout
    shown = _Display(display, out)
    evo = Evolution(config, store, archive=archive, dataset_label=dataset_label)
    attended = True
    try:
        evo.start()
        shown.generation(evo)
        remaining = 0
        while True:
            if remaining > 0 and not evo.done:
                evo.step()
                shown.generation(evo)
                remaining = 0 if evo.done else remaining - 1
                continue
            if not attended:
                if evo.done:
                    break
                remaining = evo.config.generation_max - evo.generation
                continue
            try:
                line = input_fn(f"[gen {evo.generation}/{evo.config.generation_max}] > ")
            except (EOFError, OSError):
                attended = False
                continue
            verb, *args = line.split() or [""]
            if verb in ("", "c"):
                if evo.done and not args:
                    break
                remaining = int(args[0]) if args else evo.config.generation_max - evo.generation
                if evo.done:
                    shown.say("generation_max reached; raise it with 'g N'")
            elif verb == "q":
                return evo.finish("quit")
            elif verb == "g":
                _set(evo, shown, generation_max=_int(args, 0))
            elif verb == "t":
                _set(evo, shown, tournament_size=_int(args, 0))
            elif verb == "o" and len(args) == 3:
                try:
                    r, m, c = (float(a) for a in args)
                except ValueError:
                    shown.say("fractions must be numbers")
                    continue
                _set(evo, shown, op_reproduction=r, op_mutation=m, op_crossover=c)
            elif verb == "d" and args and args[0] in DISPLAY_MODES:
                shown.mode = args[0]
            elif verb == "b":
                best = evo.best
                shown.say(f"tree {best.id}  fitness {best.fitness:g}  depth {best.depth}  "
                          f"nodes {best.node_count}")
                shown.say(f"  {render_expression(best)}")
            elif verb == "p":
                shown.say(evo.config.to_text().rstrip())
            else:
                shown.say(MENU)
    except BaseException:
        evo.abort()
        raise
    return evo.finish()


def _int(args, i):
    try:
        return int(args[i])
    except (IndexError, ValueError):
        return None


def _set(evo: Evolution, shown: _Display, **changes) -> None:
    if any(v is None for v in changes.values()):
        shown.say("expected an integer argument")
        return
    try:
        evo.reconfigure(**changes)
    except (ConfigError, ValueError) as exc:
        shown.say(f"rejected: {exc}")
