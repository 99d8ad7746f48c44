"""The ``.shs`` scene description format.

A document is a sequence of blocks ``section [name] { key value...; ... }``
with ``#`` line comments. Units are fixed per key: lengths mm, masses kg,
times s, speeds rad/s, forces N, torques N*m and every angle in degrees.
Numbers carry six significant digits; the parser rounds to that precision
so that serialization round-trips exactly.

Sections (canonical order)::

    sim { dt S; t_end S; equilibrium_tol NM; record_every N; stop t_end|equilibrium;
          max_joint_speed RADS; settle_steps N; object_damping NSMM;
          object_angular_damping NMMSRAD; }
    gravity { vector GX GY; }                        # m/s^2
    hand { tendon_stiffness K; guide_friction_mu MU; joint_damping B;
           stop_stiffness K; phalanx_mass KG; contact_stiffness K;
           contact_damping C; tangential_stiffness K; palm X1 Y1 X2 Y2 R; }
    drive { motor agonist|antagonist MAX_TORQUE NO_LOAD_SPEED;
            spool ID RADIUS SLIP_TORQUE X Y SHAFT; }
    finger NAME { base X Y; angle_deg A; mirror 0|1; width W; limits_deg LO HI LO HI LO HI;
                  phalanx K LENGTH FRICTION; guides K flexor|extensor X Y ...;
                  anchor flexor|extensor X Y; palm_guides flexor|extensor X Y ...; }
    init NAME { q_deg A B C; locked; detached; slack_flexor MM; slack_extensor MM; }
    load NAME { finger NAME; phalanx K; point X Y; force FX FY; }
    object NAME { circle R; | polygon X Y X Y ...; | capsule X1 Y1 X2 Y2 R;
                  mass KG; pose_deg X Y THETA; fixed; friction MU; drag N; }
    control { at T agonist|antagonist SPEED|hold; }
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .contact import Capsule, Circle, Polygon, is_convex_ccw
from .model import (
    FINGER_NAMES,
    SIDES,
    ClutchSpec,
    HandModel,
    MotorSpec,
    build_default_hand,
)

MOTORS = ("agonist", "antagonist")


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    shape: Circle | Polygon | Capsule
    mass: float
    pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mobile: bool = True
    friction: float | None = None
    drag: float = 0.0  # N, Coulomb resistance to translation (table friction)


@dataclass(frozen=True)
class MotorCommand:
    t: float
    motor: str
    speed: float | None  # None = hold position


@dataclass(frozen=True)
class FingerInit:
    q: tuple[float, float, float] = (0.0, 0.0, 0.0)
    locked: bool = False
    detached: bool = False
    slack_flexor: float = 0.0
    slack_extensor: float = 0.0


@dataclass(frozen=True)
class PointLoad:
    name: str
    finger: str
    phalanx: int
    point: tuple[float, float]
    force: tuple[float, float]


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.001
    t_end: float = 1.0
    equilibrium_tol: float = 1e-4  # N*m
    record_every: int = 10
    stop: str = "t_end"
    max_joint_speed: float = 200.0  # rad/s
    settle_steps: int = 50
    object_damping: float = 0.05  # N*s/mm
    object_angular_damping: float = 50.0  # N*mm*s/rad


@dataclass(frozen=True)
class Scene:
    hand: HandModel = field(default_factory=build_default_hand)
    objects: tuple[ObjectSpec, ...] = ()
    gravity: tuple[float, float] = (0.0, 0.0)
    control: tuple[MotorCommand, ...] = ()
    sim: SimConfig = field(default_factory=SimConfig)
    init: tuple[tuple[str, FingerInit], ...] = ()
    loads: tuple[PointLoad, ...] = ()

    def finger_init(self, name: str) -> FingerInit:
        for n, fi in self.init:
            if n == name:
                return fi
        return FingerInit()


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"line {self.line}, column {self.column}: {self.message}{exp}"


class SceneError(Exception):
    """Raised with one or more diagnostics when a document is rejected."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


class SceneSyntaxError(SceneError):
    pass


class SceneSemanticError(SceneError):
    pass


# ------------------------------------------------------------------ tokenizer

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?![A-Za-z_]))"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)|(?P<punct>[{};])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise SceneSyntaxError(
                [Diagnostic(line, col, f"unexpected character {text[pos]!r}", ("identifier", "number", "{", "}", ";"))]
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "punct"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def quantize(x: float) -> float:
    """Round to six significant digits (the format's number precision)."""
    if x == 0 or not math.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.6g}")


@dataclass
class Statement:
    key: str
    values: list[Token]
    line: int
    col: int


@dataclass
class Block:
    section: str
    name: str | None
    statements: list[Statement]
    line: int
    col: int


def _parse_blocks(tokens: list[Token]) -> list[Block]:
    blocks = []
    i = 0

    def fail(tok: Token, msg: str, expected: tuple[str, ...]):
        raise SceneSyntaxError([Diagnostic(tok.line, tok.col, msg, expected)])

    while tokens[i].kind != "eof":
        tok = tokens[i]
        if tok.kind != "ident":
            fail(tok, f"unexpected {tok.text!r}", ("section name",))
        section, i = tok, i + 1
        name = None
        if tokens[i].kind == "ident":
            name = tokens[i].text
            i += 1
        if tokens[i].text != "{":
            fail(tokens[i], f"unexpected {tokens[i].text or 'end of file'!r}", ("{",))
        i += 1
        stmts = []
        while tokens[i].text != "}":
            t = tokens[i]
            if t.kind == "eof":
                fail(t, "unterminated block", ("}",))
            if t.kind != "ident":
                fail(t, f"unexpected {t.text!r}", ("key", "}"))
            i += 1
            vals = []
            while tokens[i].kind in ("num", "ident"):
                vals.append(tokens[i])
                i += 1
            if tokens[i].text != ";":
                fail(tokens[i], f"unexpected {tokens[i].text or 'end of file'!r}", (";",))
            i += 1
            stmts.append(Statement(t.text, vals, t.line, t.col))
        i += 1
        blocks.append(Block(section.text, name, stmts, section.line, section.col))
    return blocks


# --------------------------------------------------------------------- parser


class _Semantic:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def error(self, node, msg: str):
        self.diags.append(Diagnostic(node.line, node.col, msg))

    def nums(self, st: Statement, n: int | None = None, min_n: int = 0) -> list[float] | None:
        out = []
        for v in st.values:
            if v.kind != "num":
                self.error(v, f"{st.key}: expected a number, got {v.text!r}")
                return None
            out.append(quantize(float(v.text)))
        if n is not None and len(out) != n:
            self.error(st, f"{st.key}: expected {n} value(s), got {len(out)}")
            return None
        if len(out) < min_n:
            self.error(st, f"{st.key}: expected at least {min_n} values, got {len(out)}")
            return None
        return out

    def num(self, st: Statement) -> float | None:
        v = self.nums(st, 1)
        return None if v is None else v[0]

    def words(self, st: Statement, n: int) -> list[str] | None:
        if len(st.values) < n or any(v.kind != "ident" for v in st.values[:n]):
            self.error(st, f"{st.key}: expected {n} word(s)")
            return None
        return [v.text for v in st.values[:n]]

    def flag(self, st: Statement) -> bool:
        if st.values:
            self.error(st, f"{st.key}: takes no value")
        return True


def _pairs(vals: list[float]) -> tuple[tuple[float, float], ...]:
    return tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))


def _deg(x: float) -> float:
    return math.radians(x)


def parse_scene(text: str) -> Scene:
    """Parse a scene document; unspecified fields take their defaults.

    Raises ``SceneSyntaxError`` or ``SceneSemanticError`` carrying
    line-numbered diagnostics.
    """
    if not isinstance(text, str):
        raise SceneSyntaxError([Diagnostic(1, 1, "document must be text")])
    blocks = _parse_blocks(tokenize(text))
    sem = _Semantic()
    hand = build_default_hand()
    scene = Scene(hand=hand)
    objects: list[ObjectSpec] = []
    control: list[MotorCommand] = []
    loads: list[PointLoad] = []
    init: dict[str, FingerInit] = {}
    fingers = {f.name: f for f in hand.fingers}
    finger_order = [f.name for f in hand.fingers]
    hand_fields: dict = {}
    motors = list(hand.drive.motors)
    clutches = list(hand.drive.clutches)
    spools = list(hand.drive.spools)
    palm_guides = list(hand.palm_guides)
    sim_fields: dict = {}
    gravity = scene.gravity

    for b in blocks:
        needs_name = b.section in ("finger", "init", "load", "object")
        if needs_name and b.name is None:
            sem.error(b, f"section {b.section!r} needs a name")
            continue
        if not needs_name and b.name is not None and b.section in (
            "sim", "gravity", "hand", "drive", "control"
        ):
            sem.error(b, f"section {b.section!r} takes no name")
            continue
        if b.section == "sim":
            _parse_sim(b, sem, sim_fields)
        elif b.section == "gravity":
            for st in b.statements:
                if st.key == "vector":
                    v = sem.nums(st, 2)
                    if v:
                        gravity = (v[0], v[1])
                else:
                    sem.error(st, f"unknown key {st.key!r} in gravity")
        elif b.section == "hand":
            _parse_hand(b, sem, hand_fields)
        elif b.section == "drive":
            _parse_drive(b, sem, motors, clutches, spools)
        elif b.section == "finger":
            if b.name not in fingers:
                sem.error(b, f"unknown finger {b.name!r}")
                continue
            fingers[b.name] = _parse_finger(b, sem, fingers[b.name], palm_guides, finger_order)
        elif b.section == "init":
            if b.name not in fingers:
                sem.error(b, f"unknown finger {b.name!r}")
                continue
            init[b.name] = _parse_init(b, sem)
        elif b.section == "load":
            ld = _parse_load(b, sem, fingers)
            if ld is not None:
                loads.append(ld)
        elif b.section == "object":
            if any(o.name == b.name for o in objects):
                sem.error(b, f"duplicate object name {b.name!r}")
                continue
            obj = _parse_object(b, sem)
            if obj is not None:
                objects.append(obj)
        elif b.section == "control":
            for st in b.statements:
                if st.key != "at":
                    sem.error(st, f"unknown key {st.key!r} in control")
                    continue
                cmd = _parse_command(st, sem)
                if cmd is not None:
                    control.append(cmd)
        else:
            sem.error(b, f"unknown section {b.section!r}")

    if sem.diags:
        raise SceneSemanticError(sem.diags)
    drive = replace(hand.drive, motors=tuple(motors), clutches=tuple(clutches), spools=tuple(spools))
    hand = replace(
        hand,
        fingers=tuple(fingers[n] for n in finger_order),
        palm_guides=tuple(palm_guides),
        drive=drive,
        **hand_fields,
    )
    init_t = tuple((n, init[n]) for n in finger_order if n in init)
    control.sort(key=lambda c: (c.t, MOTORS.index(c.motor)))
    return Scene(
        hand=hand,
        objects=tuple(objects),
        gravity=gravity,
        control=tuple(control),
        sim=replace(SimConfig(), **sim_fields),
        init=init_t,
        loads=tuple(loads),
    )


_SIM_FLOAT = ("dt", "t_end", "equilibrium_tol", "max_joint_speed", "object_damping",
              "object_angular_damping")
_SIM_INT = ("record_every", "settle_steps")
_HAND_FLOAT = ("tendon_stiffness", "guide_friction_mu", "joint_damping", "stop_stiffness",
               "phalanx_mass", "contact_stiffness", "contact_damping", "tangential_stiffness")


def _parse_sim(b: Block, sem: _Semantic, out: dict) -> None:
    for st in b.statements:
        if st.key in _SIM_FLOAT:
            v = sem.num(st)
            if v is None:
                continue
            if st.key == "dt" and not v > 0:
                sem.error(st, "dt must be positive")
            elif v < 0:
                sem.error(st, f"{st.key} must be non-negative")
            else:
                out[st.key] = v
        elif st.key in _SIM_INT:
            v = sem.num(st)
            if v is None:
                continue
            if v != int(v) or v < 1:
                sem.error(st, f"{st.key} must be a positive integer")
            else:
                out[st.key] = int(v)
        elif st.key == "stop":
            w = sem.words(st, 1)
            if w and w[0] in ("t_end", "equilibrium") and len(st.values) == 1:
                out["stop"] = w[0]
            else:
                sem.error(st, "stop must be t_end or equilibrium")
        else:
            sem.error(st, f"unknown key {st.key!r} in sim")


def _parse_hand(b: Block, sem: _Semantic, out: dict) -> None:
    for st in b.statements:
        if st.key in _HAND_FLOAT:
            v = sem.num(st)
            if v is None:
                continue
            if v < 0 or (v == 0 and st.key in ("tendon_stiffness", "joint_damping", "stop_stiffness", "contact_stiffness")):
                sem.error(st, f"{st.key} out of range")
            else:
                out[st.key] = v
        elif st.key == "palm":
            v = sem.nums(st, 5)
            if v:
                if v[4] <= 0:
                    sem.error(st, "palm radius must be positive")
                else:
                    out["palm"] = ((v[0], v[1]), (v[2], v[3]), v[4])
        else:
            sem.error(st, f"unknown key {st.key!r} in hand")


def _parse_drive(b: Block, sem: _Semantic, motors, clutches, spools) -> None:
    for st in b.statements:
        if st.key == "motor":
            if not st.values or st.values[0].text not in MOTORS:
                sem.error(st, "motor: expected agonist or antagonist")
                continue
            vals = sem.nums(Statement(st.key, st.values[1:], st.line, st.col), 2)
            if vals is None:
                continue
            if vals[0] <= 0 or vals[1] < 0:
                sem.error(st, "motor torque must be positive and speed non-negative")
                continue
            motors[MOTORS.index(st.values[0].text)] = MotorSpec(vals[0], vals[1])
        elif st.key == "spool":
            v = sem.nums(st, 6)
            if v is None:
                continue
            sid = int(v[0])
            if v[0] != sid or not 0 <= sid < len(spools):
                sem.error(st, f"spool id {v[0]} out of range")
            elif v[1] <= 0 or v[2] <= 0:
                sem.error(st, "spool radius and slip torque must be positive")
            elif v[5] not in (0, 1):
                sem.error(st, "spool shaft must be 0 or 1")
            else:
                spools[sid] = replace(spools[sid], radius=v[1], position=(v[3], v[4]), shaft=int(v[5]))
                clutches[spools[sid].clutch] = ClutchSpec(v[2])
        else:
            sem.error(st, f"unknown key {st.key!r} in drive")


def _parse_finger(b: Block, sem: _Semantic, finger, palm_guides, order):
    fi = order.index(finger.name)
    phal = list(finger.phalanges)
    changes: dict = {}
    for st in b.statements:
        if st.key == "base":
            v = sem.nums(st, 2)
            if v:
                changes["base"] = (v[0], v[1])
        elif st.key == "angle_deg":
            v = sem.num(st)
            if v is not None:
                changes["angle"] = _deg(v)
        elif st.key == "mirror":
            v = sem.num(st)
            if v is not None:
                if v not in (0, 1):
                    sem.error(st, "mirror must be 0 or 1")
                else:
                    changes["mirror"] = bool(v)
        elif st.key == "width":
            v = sem.num(st)
            if v is not None:
                if v <= 0:
                    sem.error(st, "width must be positive")
                else:
                    changes["width"] = v
        elif st.key == "limits_deg":
            v = sem.nums(st, 6)
            if v:
                changes["joint_limits"] = tuple((_deg(v[i]), _deg(v[i + 1])) for i in (0, 2, 4))
        elif st.key == "phalanx":
            v = sem.nums(st, 3)
            if v is None:
                continue
            k = int(v[0])
            if v[0] != k or not 0 <= k < len(phal):
                sem.error(st, f"phalanx index {v[0]} out of range")
            elif v[1] <= 0:
                sem.error(st, "phalanx length must be positive")
            elif v[2] < 0:
                sem.error(st, "friction must be non-negative")
            else:
                phal[k] = replace(phal[k], length=v[1], pad_friction=v[2])
        elif st.key == "guides":
            if len(st.values) < 2 or st.values[1].text not in SIDES:
                sem.error(st, "guides: expected phalanx index and side")
                continue
            head = sem.nums(Statement(st.key, st.values[:1], st.line, st.col), 1)
            v = sem.nums(Statement(st.key, st.values[2:], st.line, st.col))
            if head is None or v is None:
                continue
            k = int(head[0])
            if head[0] != k or not 0 <= k < len(phal):
                sem.error(st, f"phalanx index {head[0]} out of range")
            elif len(v) % 2:
                sem.error(st, "guides: coordinates come in x y pairs")
            else:
                side = st.values[1].text
                phal[k] = replace(phal[k], **{f"guides_{side}": _pairs(v)})
        elif st.key == "anchor":
            if not st.values or st.values[0].text not in SIDES:
                sem.error(st, "anchor: expected side")
                continue
            v = sem.nums(Statement(st.key, st.values[1:], st.line, st.col), 2)
            if v:
                phal[-1] = replace(phal[-1], **{f"anchor_{st.values[0].text}": (v[0], v[1])})
        elif st.key == "palm_guides":
            if not st.values or st.values[0].text not in SIDES:
                sem.error(st, "palm_guides: expected side")
                continue
            v = sem.nums(Statement(st.key, st.values[1:], st.line, st.col))
            if v is None:
                continue
            if len(v) % 2:
                sem.error(st, "palm_guides: coordinates come in x y pairs")
            else:
                rid = fi + (0 if st.values[0].text == "flexor" else len(order))
                palm_guides[rid] = _pairs(v)
        else:
            sem.error(st, f"unknown key {st.key!r} in finger")
    return replace(finger, phalanges=tuple(phal), **changes)


def _parse_init(b: Block, sem: _Semantic) -> FingerInit:
    fields: dict = {}
    for st in b.statements:
        if st.key == "q_deg":
            v = sem.nums(st, 3)
            if v:
                fields["q"] = tuple(_deg(x) for x in v)
        elif st.key in ("locked", "detached"):
            fields[st.key] = sem.flag(st)
        elif st.key in ("slack_flexor", "slack_extensor"):
            v = sem.num(st)
            if v is not None:
                if v < 0:
                    sem.error(st, f"{st.key} must be non-negative")
                else:
                    fields[st.key] = v
        else:
            sem.error(st, f"unknown key {st.key!r} in init")
    return FingerInit(**fields)


def _parse_load(b: Block, sem: _Semantic, fingers) -> PointLoad | None:
    fields: dict = {"name": b.name}
    for st in b.statements:
        if st.key == "finger":
            w = sem.words(st, 1)
            if w:
                if w[0] not in fingers:
                    sem.error(st, f"unknown finger {w[0]!r}")
                else:
                    fields["finger"] = w[0]
        elif st.key == "phalanx":
            v = sem.num(st)
            if v is not None:
                if v not in (0, 1, 2, 3):
                    sem.error(st, "phalanx must be 0..3")
                else:
                    fields["phalanx"] = int(v)
        elif st.key in ("point", "force"):
            v = sem.nums(st, 2)
            if v:
                fields[st.key] = (v[0], v[1])
        else:
            sem.error(st, f"unknown key {st.key!r} in load")
    missing = [k for k in ("finger", "phalanx", "point", "force") if k not in fields]
    if missing:
        sem.error(b, f"load {b.name!r} missing {', '.join(missing)}")
        return None
    return PointLoad(**fields)


def _parse_object(b: Block, sem: _Semantic) -> ObjectSpec | None:
    shape = None
    mass = None
    pose = (0.0, 0.0, 0.0)
    mobile = True
    friction = None
    drag = 0.0
    keys = {st.key for st in b.statements}
    for st in b.statements:
        if st.key in ("circle", "polygon", "capsule"):
            if shape is not None:
                sem.error(st, "object has more than one shape")
                continue
            if st.key == "circle":
                v = sem.num(st)
                if v is not None:
                    if v <= 0:
                        sem.error(st, "circle radius must be positive")
                    else:
                        shape = Circle(v)
            elif st.key == "polygon":
                v = sem.nums(st, min_n=6)
                if v is None:
                    continue
                if len(v) % 2:
                    sem.error(st, "polygon: coordinates come in x y pairs")
                elif not is_convex_ccw(_pairs(v)):
                    sem.error(st, "polygon must be convex with counter-clockwise vertices")
                else:
                    shape = Polygon(_pairs(v))
            else:
                v = sem.nums(st, 5)
                if v:
                    if v[4] <= 0:
                        sem.error(st, "capsule radius must be positive")
                    else:
                        shape = Capsule((v[0], v[1]), (v[2], v[3]), v[4])
        elif st.key == "mass":
            v = sem.num(st)
            if v is not None:
                if v <= 0:
                    sem.error(st, "mass must be positive")
                else:
                    mass = v
        elif st.key == "pose_deg":
            v = sem.nums(st, 3)
            if v:
                pose = (v[0], v[1], _deg(v[2]))
        elif st.key == "fixed":
            mobile = not sem.flag(st)
        elif st.key in ("friction", "drag"):
            v = sem.num(st)
            if v is not None:
                if v < 0:
                    sem.error(st, f"{st.key} must be non-negative")
                elif st.key == "friction":
                    friction = v
                else:
                    drag = v
        else:
            sem.error(st, f"unknown key {st.key!r} in object")
    # a rejected shape or mass statement has already been reported
    if shape is None:
        if not keys & {"circle", "polygon", "capsule"}:
            sem.error(b, f"object {b.name!r} has no shape")
        return None
    if mass is None:
        if "mass" not in keys:
            sem.error(b, f"object {b.name!r} has no mass")
        return None
    return ObjectSpec(b.name, shape, mass, pose, mobile, friction, drag)


def _parse_command(st: Statement, sem: _Semantic) -> MotorCommand | None:
    if len(st.values) != 3:
        sem.error(st, "at: expected TIME MOTOR SPEED|hold")
        return None
    t_tok, m_tok, s_tok = st.values
    if t_tok.kind != "num" or (t := quantize(float(t_tok.text))) < 0:
        sem.error(st, "at: time must be a non-negative number")
        return None
    if m_tok.text not in MOTORS:
        sem.error(m_tok, f"unknown motor {m_tok.text!r}")
        return None
    if s_tok.kind == "ident":
        if s_tok.text != "hold":
            sem.error(s_tok, f"expected speed or hold, got {s_tok.text!r}")
            return None
        return MotorCommand(t, m_tok.text, None)
    return MotorCommand(t, m_tok.text, quantize(float(s_tok.text)))


# ----------------------------------------------------------------- serializer


def fmt(x: float) -> str:
    s = f"{quantize(float(x)):.6g}"
    return "0" if s == "-0" else s


def _fmt_deg(x: float) -> str:
    return fmt(math.degrees(x))


def _nums(vals) -> str:
    return " ".join(fmt(v) for v in vals)


def serialize_scene(scene: Scene) -> str:
    """Canonical text form: fixed section and key order, 6 significant digits, LF."""
    out: list[str] = []

    def block(header: str, lines: list[str]):
        out.append(header + " {")
        out.extend("  " + ln + ";" for ln in lines)
        out.append("}")
        out.append("")

    s = scene.sim
    block("sim", [
        f"dt {fmt(s.dt)}", f"t_end {fmt(s.t_end)}", f"equilibrium_tol {fmt(s.equilibrium_tol)}",
        f"record_every {s.record_every}", f"stop {s.stop}",
        f"max_joint_speed {fmt(s.max_joint_speed)}", f"settle_steps {s.settle_steps}",
        f"object_damping {fmt(s.object_damping)}",
        f"object_angular_damping {fmt(s.object_angular_damping)}",
    ])
    block("gravity", [f"vector {_nums(scene.gravity)}"])
    h = scene.hand
    (px1, py1), (px2, py2), pr = h.palm
    block("hand", [f"{k} {fmt(getattr(h, k))}" for k in _HAND_FLOAT]
          + [f"palm {_nums((px1, py1, px2, py2, pr))}"])
    dl = [f"motor {MOTORS[i]} {fmt(m.max_torque)} {fmt(m.no_load_speed)}"
          for i, m in enumerate(h.drive.motors)]
    for i, sp in enumerate(h.drive.spools):
        slip = h.drive.clutches[sp.clutch].slip_torque
        dl.append(f"spool {i} {fmt(sp.radius)} {fmt(slip)} {_nums(sp.position)} {sp.shaft}")
    block("drive", dl)
    n = len(h.fingers)
    for fi, f in enumerate(h.fingers):
        fl = [
            f"base {_nums(f.base)}",
            f"angle_deg {_fmt_deg(f.angle)}",
            f"mirror {int(f.mirror)}",
            f"width {fmt(f.width)}",
            "limits_deg " + " ".join(_fmt_deg(v) for lim in f.joint_limits for v in lim),
        ]
        for k, ph in enumerate(f.phalanges):
            fl.append(f"phalanx {k} {fmt(ph.length)} {fmt(ph.pad_friction)}")
        for k, ph in enumerate(f.phalanges):
            for side in SIDES:
                pts = [c for p in ph.guides(side) for c in p]
                fl.append(f"guides {k} {side} {_nums(pts)}".rstrip())
        for side in SIDES:
            a = f.phalanges[-1].anchor(side)
            if a is not None:
                fl.append(f"anchor {side} {_nums(a)}")
        for si, side in enumerate(SIDES):
            pts = [c for p in h.palm_guides[fi + si * n] for c in p]
            fl.append(f"palm_guides {side} {_nums(pts)}".rstrip())
        block(f"finger {f.name}", fl)
    for name, fi in scene.init:
        il = [f"q_deg {' '.join(_fmt_deg(v) for v in fi.q)}"]
        if fi.locked:
            il.append("locked")
        if fi.detached:
            il.append("detached")
        il.append(f"slack_flexor {fmt(fi.slack_flexor)}")
        il.append(f"slack_extensor {fmt(fi.slack_extensor)}")
        block(f"init {name}", il)
    for ld in scene.loads:
        block(f"load {ld.name}", [
            f"finger {ld.finger}", f"phalanx {ld.phalanx}",
            f"point {_nums(ld.point)}", f"force {_nums(ld.force)}",
        ])
    for o in scene.objects:
        sh = o.shape
        if isinstance(sh, Circle):
            ol = [f"circle {fmt(sh.radius)}"]
        elif isinstance(sh, Polygon):
            ol = [f"polygon {_nums([c for v in sh.vertices for c in v])}"]
        else:
            ol = [f"capsule {_nums((*sh.p1, *sh.p2, sh.radius))}"]
        ol.append(f"mass {fmt(o.mass)}")
        ol.append(f"pose_deg {fmt(o.pose[0])} {fmt(o.pose[1])} {_fmt_deg(o.pose[2])}")
        if not o.mobile:
            ol.append("fixed")
        if o.friction is not None:
            ol.append(f"friction {fmt(o.friction)}")
        if o.drag:
            ol.append(f"drag {fmt(o.drag)}")
        block(f"object {o.name}", ol)
    if scene.control:
        cmds = sorted(scene.control, key=lambda c: (c.t, MOTORS.index(c.motor)))
        block("control", [
            f"at {fmt(c.t)} {c.motor} {'hold' if c.speed is None else fmt(c.speed)}" for c in cmds
        ])
    return "\n".join(out).rstrip("\n") + "\n"


def default_scene() -> Scene:
    return Scene()


__all__ = [
    "Scene", "ObjectSpec", "MotorCommand", "FingerInit", "PointLoad", "SimConfig",
    "Diagnostic", "SceneError", "SceneSyntaxError", "SceneSemanticError",
    "parse_scene", "serialize_scene", "default_scene", "quantize", "FINGER_NAMES",
]
