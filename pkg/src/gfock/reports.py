"""Report objects, deterministic serialization, config loading, validation.

Reports are serialized with a fixed key order (sorted), floats printed with
17 significant digits and -0.0 normalized, so identical inputs yield
byte-identical files.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import jsonschema


@dataclass
class Report:
    check: str
    per_level: list
    verdict: str
    fit: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "PASS"

    def to_dict(self):
        return {
            "check": self.check,
            "perLevel": self.per_level,
            "verdict": self.verdict,
            "fit": self.fit,
            "meta": self.meta,
        }


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in report")
    if x == 0.0:
        x = 0.0
    return format(x, ".17g")


def dumps(obj, indent=0):
    """Deterministic JSON text: sorted keys, 17-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, Report):
        return dumps(obj.to_dict(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError("report keys must be strings, got %r" % (key,))
            items.append(
                "%s%s: %s" % (inner, json.dumps(key), dumps(obj[key], indent + 1))
            )
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ["%s%s" % (inner, dumps(v, indent + 1)) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int,)):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps("%d/%d" % (obj.numerator, obj.denominator))
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    if isinstance(obj, complex):
        raise TypeError("complex values must be split into re/im fields")
    raise TypeError("cannot serialize %r" % type(obj))


def write_report(report, path):
    text = dumps(report) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def write_csv(rows, columns, path):
    """Deterministic CSV with the same float formatting as JSON reports."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            val = row[col]
            if isinstance(val, bool):
                cells.append("true" if val else "false")
            elif isinstance(val, float):
                cells.append(_fmt_float(val))
            else:
                cells.append(str(val))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def strip_json_comments(text):
    """Drop // line comments occurring outside of string literals."""
    out = []
    in_str = False
    escape = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_str:
            out.append(ch)
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            i += 1
            continue
        if ch == '"':
            in_str = True
            out.append(ch)
            i += 1
            continue
        if ch == "/" and i + 1 < len(text) and text[i + 1] == "/":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return json.loads(strip_json_comments(text))


def report_schema():
    with resources.files("gfock").joinpath("schema/report.schema.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def validate_report_text(text):
    """Validate report JSON text; returns (ok, list of 'path: message')."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return False, ["<document>: not valid JSON (%s)" % exc.msg]
    validator = jsonschema.Draft7Validator(report_schema())
    errors = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path)):
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append("%s: %s" % (path, err.message))
    return not errors, errors


def validate_report_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return validate_report_text(fh.read())
