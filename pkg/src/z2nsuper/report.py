"""Plain-text PASS/FAIL reports with canonically printed residuals."""

from __future__ import annotations

from dataclasses import dataclass, field

from .series import GradedSeries


@dataclass(frozen=True)
class CheckEntry:
    label: str
    failures: tuple[tuple[str, GradedSeries], ...] = ()
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures and not self.note

    def format(self) -> str:
        line = ("PASS " if self.ok else "FAIL ") + self.label
        details = [f"{name}: {res}" for name, res in self.failures]
        if self.note:
            details.append(self.note)
        if details:
            line += "  " + "; ".join(details)
        return line


@dataclass
class Report:
    title: str
    entries: list[CheckEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def add(self, label: str, failures=(), note: str = "") -> CheckEntry:
        entry = CheckEntry(label, tuple(failures), note)
        self.entries.append(entry)
        return entry

    def failures(self) -> list[CheckEntry]:
        return [e for e in self.entries if not e.ok]

    def find(self, label: str) -> CheckEntry:
        return next(e for e in self.entries if e.label == label)

    def format(self) -> str:
        n_fail = len(self.failures())
        lines = [f"# {self.title}"]
        lines += [e.format() for e in self.entries]
        lines.append(f"# {'PASS' if self.ok else 'FAIL'}: {len(self.entries) - n_fail}/{len(self.entries)} checks passed")
        return "\n".join(lines) + "\n"
