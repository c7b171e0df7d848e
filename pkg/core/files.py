"""
Reading and writing designs, resolutions and provenance tables.

Text design format (the default)::

    # designs-format 1
    # declare t=3 lambda=18 simple=true      (optional)
    16 5 1008
    0 1 2 3 16
    ...

The JSON format holds the same data as ``{"v", "k", "blocks", ...}`` with the
optional keys ``t``, ``lambda`` and ``simple``. Declared parameters are
verified by exhaustive counting whenever a file is read.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from core.designs import BLOCK_DTYPE, Design, is_simple, lambda_profile
from core.errors import DesignFormatError, VerificationError
from core.resolutions import from_class_blocks

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
PROVENANCE_COLUMNS = ["h", "i", "j", "btype"]


# ============= VALUE COERCION =============

def _safe_int(value, param_name="value", line=None):
    """
    Convert a token to int.

    Raises:
        DesignFormatError: naming the parameter, the raw value and its type
    """
    if value is None or value == "" or value == "null":
        raise DesignFormatError(f"missing value for {param_name}", line=line)
    if isinstance(value, bool):
        raise DesignFormatError(f"Cannot convert {param_name}='{value}' (type: bool) to int", line=line)
    if isinstance(value, float):
        if not value.is_integer():
            raise DesignFormatError(f"Cannot convert {param_name}='{value}' (type: float) to int: not integral",
                                    line=line)
        return int(value)
    try:
        return int(value)
    except (ValueError, TypeError) as e:
        raise DesignFormatError(
            f"Cannot convert {param_name}='{value}' (type: {type(value).__name__}) to int: {e}",
            line=line,
        )


def _safe_bool(value, param_name="value", line=None):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes"):
        return True
    if text in ("0", "false", "no"):
        return False
    raise DesignFormatError(f"Cannot convert {param_name}='{value}' (type: {type(value).__name__}) to bool",
                            line=line)


def _detect_format(path, fmt):
    if fmt:
        return fmt
    return "json" if str(path).endswith(".json") else "text"


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _ascii_lines(path):
    """Yield (line number, stripped line); a non-ASCII byte is a format error on its line."""
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                yield lineno, raw.decode("ascii").strip()
            except UnicodeDecodeError as e:
                raise DesignFormatError(f"non-ASCII byte 0x{raw[e.start]:02x} at column {e.start + 1}", line=lineno)


def _load_json_object(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise DesignFormatError(f"invalid {what} JSON: {e.msg}", line=e.lineno)
    except UnicodeDecodeError as e:
        raise DesignFormatError(f"{what} JSON is not UTF-8: {e.reason}")
    if not isinstance(doc, dict):
        raise DesignFormatError(f"{what} JSON must be an object, got {type(doc).__name__}")
    return doc


# ============= DESIGN FILES =============

def _parse_declare(text, line):
    declared = {}
    for token in text.split():
        if "=" not in token:
            raise DesignFormatError(f"malformed declaration '{token}' (expected key=value)", line=line)
        key, value = token.split("=", 1)
        if key in ("t", "lambda"):
            declared[key] = _safe_int(value, key, line)
        elif key == "simple":
            declared[key] = _safe_bool(value, key, line)
        else:
            raise DesignFormatError(f"unknown declaration key '{key}'", line=line)
    return declared


def _read_text_blocks(path):
    """Return (v, k, raw blocks in file order, declared parameters)."""
    declared = {}
    header = None
    rows = []
    for lineno, line in _ascii_lines(path):
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("declare"):
                declared.update(_parse_declare(body[len("declare"):], lineno))
            elif body.startswith("designs-format"):
                version = _safe_int(body.split()[-1], "format version", lineno)
                if version != FORMAT_VERSION:
                    raise DesignFormatError(f"unsupported format version {version}", line=lineno)
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 3:
                raise DesignFormatError(f"header must be 'v k n_blocks', got '{line}'", line=lineno)
            header = tuple(_safe_int(tok, name, lineno) for tok, name in zip(tokens, ("v", "k", "n_blocks")))
            continue
        v, k, _ = header
        if len(tokens) != k:
            raise DesignFormatError(f"block has {len(tokens)} points, expected k={k}", line=lineno)
        block = [_safe_int(tok, "point", lineno) for tok in tokens]
        if any(x < 0 or x >= v for x in block):
            raise DesignFormatError(f"point label outside 0..{v - 1} in '{line}'", line=lineno)
        if any(block[r] >= block[r + 1] for r in range(k - 1)):
            raise DesignFormatError(f"block '{line}' is not strictly increasing", line=lineno)
        rows.append(block)
    if header is None:
        raise DesignFormatError(f"{path}: no header line found")
    v, k, n_blocks = header
    if n_blocks != len(rows):
        raise DesignFormatError(f"header announces {n_blocks} blocks but the file holds {len(rows)}")
    blocks = np.array(rows, dtype=BLOCK_DTYPE).reshape(len(rows), k)
    return v, k, blocks, declared


def _read_json_blocks(path):
    doc = _load_json_object(path, "design")
    for key in ("v", "k", "blocks"):
        if key not in doc:
            raise DesignFormatError(f"JSON design is missing '{key}'")
    if not isinstance(doc["blocks"], list):
        raise DesignFormatError(f"JSON 'blocks' must be a list, got {type(doc['blocks']).__name__}")
    v = _safe_int(doc["v"], "v")
    k = _safe_int(doc["k"], "k")
    rows = []
    for n, block in enumerate(doc["blocks"]):
        if not isinstance(block, list) or len(block) != k:
            raise DesignFormatError(f"blocks[{n}] must be a list of {k} points")
        pts = [_safe_int(x, f"blocks[{n}]") for x in block]
        if any(x < 0 or x >= v for x in pts) or any(pts[r] >= pts[r + 1] for r in range(k - 1)):
            raise DesignFormatError(f"blocks[{n}]={pts} is not a strictly increasing subset of 0..{v - 1}")
        rows.append(pts)
    declared = {}
    if "t" in doc:
        declared["t"] = _safe_int(doc["t"], "t")
    if "lambda" in doc:
        declared["lambda"] = _safe_int(doc["lambda"], "lambda")
    if "simple" in doc:
        declared["simple"] = _safe_bool(doc["simple"], "simple")
    return v, k, np.array(rows, dtype=BLOCK_DTYPE).reshape(len(rows), k), declared, doc


def check_declared(d, declared, threads=None):
    """Verify declared t, λ and simplicity against the actual blocks."""
    if "lambda" in declared and "t" not in declared:
        raise DesignFormatError("a declared lambda needs a declared t")
    if "t" in declared:
        t = declared["t"]
        profile = lambda_profile(d, t, threads=threads)
        if not profile.is_design[t]:
            raise VerificationError(f"declared {t}-design fails: {profile.witnesses[t]}",
                                    witness=profile.witnesses[t])
        if "lambda" in declared and profile.lambdas[t] != declared["lambda"]:
            raise VerificationError(
                f"declared lambda_{t}={declared['lambda']} but counting gives {profile.lambdas[t]}",
                witness=(declared["lambda"], profile.lambdas[t]),
            )
    if declared.get("simple"):
        report = is_simple(d)
        if not report:
            raise VerificationError(f"declared simple but block {report.witness} is repeated",
                                    witness=report.witness)


def read_design(path, fmt=None, threads=None):
    """Load a design (blocks are put in canonical order) and check its declarations."""
    fmt = _detect_format(path, fmt)
    if fmt == "json":
        v, k, blocks, declared, _ = _read_json_blocks(path)
    else:
        v, k, blocks, declared = _read_text_blocks(path)
    d = Design.from_blocks(v, k, blocks)
    check_declared(d, declared, threads=threads)
    logger.info("read %r from %s", d, path)
    return d


def write_design(d, path, fmt=None, declare=None):
    """
    Write ``d`` in canonical block order. ``declare`` may carry t, lambda and
    simple; they are written as-is and checked on the next read.
    """
    fmt = _detect_format(path, fmt)
    _ensure_parent(path)
    declare = declare or {}
    if fmt == "json":
        doc = {"format": FORMAT_VERSION, "v": d.v, "k": d.k}
        doc.update(declare)
        doc["blocks"] = d.blocks.tolist()
        with open(path, "w") as fh:
            json.dump(doc, fh)
        return path
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if declare:
            fh.write("# designs-format %d\n" % FORMAT_VERSION)
            items = " ".join(f"{key}={str(value).lower() if isinstance(value, bool) else value}"
                             for key, value in declare.items())
            fh.write(f"# declare {items}\n")
        fh.write(f"{d.v} {d.k} {d.b}\n")
        if d.b:
            np.savetxt(fh, d.blocks, fmt="%d", delimiter=" ", newline="\n")
    return path


# ============= RESOLUTION FILES =============

def write_resolution(r, path, classes_path=None, fmt=None):
    """
    Blocks are written class after class. JSON files carry ``class_starts``
    and ``sigma``; text files need a sidecar with one start offset per line.
    """
    fmt = _detect_format(path, fmt)
    _ensure_parent(path)
    ordered = np.vstack([r.design.blocks[idx] for idx in r.classes])
    starts = np.cumsum([0] + [len(idx) for idx in r.classes[:-1]]).tolist()
    if fmt == "json":
        doc = {"format": FORMAT_VERSION, "v": r.v, "k": r.k, "sigma": r.sigma,
               "class_starts": starts, "blocks": ordered.tolist()}
        with open(path, "w") as fh:
            json.dump(doc, fh)
        return path
    if classes_path is None:
        raise DesignFormatError("a text resolution needs a classes file for the class starts")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# designs-format {FORMAT_VERSION}\n# sigma={r.sigma}\n")
        fh.write(f"{r.v} {r.k} {len(ordered)}\n")
        np.savetxt(fh, ordered, fmt="%d", delimiter=" ", newline="\n")
    with open(classes_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(str(s) for s in starts) + "\n")
    return path


def _read_starts(classes_path):
    starts = []
    for lineno, line in _ascii_lines(classes_path):
        if line and not line.startswith("#"):
            starts.append(_safe_int(line, "class start", lineno))
    return starts


def _read_text_sigma(path):
    for lineno, line in _ascii_lines(path):
        if line.startswith("# sigma="):
            return _safe_int(line.split("=", 1)[1], "sigma", lineno)
        if line and not line.startswith("#"):
            return None
    return None


def read_resolution(path, classes_path=None, fmt=None):
    """Load a resolution and verify it; a declared σ must match the counted one."""
    fmt = _detect_format(path, fmt)
    if fmt == "json":
        v, k, blocks, _, doc = _read_json_blocks(path)
        if "class_starts" not in doc:
            raise DesignFormatError("JSON resolution is missing 'class_starts'")
        if not isinstance(doc["class_starts"], list):
            raise DesignFormatError(f"JSON 'class_starts' must be a list, got {type(doc['class_starts']).__name__}")
        starts = [_safe_int(s, "class_starts") for s in doc["class_starts"]]
        declared_sigma = _safe_int(doc["sigma"], "sigma") if "sigma" in doc else None
    else:
        if classes_path is None:
            raise DesignFormatError("a text resolution needs a classes file")
        v, k, blocks, _ = _read_text_blocks(path)
        starts = _read_starts(classes_path)
        declared_sigma = _read_text_sigma(path)
    if not starts or starts[0] != 0 or any(a >= b for a, b in zip(starts, starts[1:])) or starts[-1] >= len(blocks):
        raise DesignFormatError(f"class starts {starts[:5]}... do not partition {len(blocks)} blocks")
    bounds = starts + [len(blocks)]
    r = from_class_blocks(v, k, [blocks[bounds[n]:bounds[n + 1]] for n in range(len(starts))])
    if declared_sigma is not None and declared_sigma != r.sigma:
        raise VerificationError(f"declared sigma={declared_sigma} but every class has sigma={r.sigma}",
                                witness=(declared_sigma, r.sigma))
    return r


# ============= PROVENANCE =============

def write_provenance(frame, path, meta=None):
    """Provenance rows (h, i, j, btype), parallel to canonical block order."""
    _ensure_parent(path)
    doc = dict(meta or {})
    doc["format"] = FORMAT_VERSION
    doc["columns"] = PROVENANCE_COLUMNS
    doc["rows"] = frame[PROVENANCE_COLUMNS].to_numpy().tolist()
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path


def read_provenance(path):
    """Return (frame, meta) for a provenance sidecar."""
    doc = _load_json_object(path, "provenance")
    if doc.get("columns") != PROVENANCE_COLUMNS:
        raise DesignFormatError(f"provenance columns must be {PROVENANCE_COLUMNS}")
    rows = doc.get("rows", [])
    if not isinstance(rows, list) or any(not isinstance(row, list) or len(row) != 4 for row in rows):
        raise DesignFormatError(f"provenance rows must be lists of {len(PROVENANCE_COLUMNS)} values")
    frame = pd.DataFrame(np.array(rows, dtype=np.int64).reshape(len(rows), 4), columns=PROVENANCE_COLUMNS)
    meta = {key: value for key, value in doc.items() if key not in ("columns", "rows", "format")}
    return frame, meta
