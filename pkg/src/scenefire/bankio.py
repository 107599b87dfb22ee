"""Filter-bank persistence: a single JSON document, format version 1.

Top level: ``version`` (= 1), ``bank`` (Gabor bank plus optional inhibition),
``scenes`` (each with its detection threshold and filters).  Angles are in
radians, distances in pixels.  Floats are written with Python's shortest
round-tripping representation, so save -> load is field-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

from .cosfire import CosfireFilter, CosfireTuple
from .errors import BankFormatError, BankVersionError, SceneFireError
from .gabor import GaborBank
from .inhibition import InhibitionParams
from .scene import SceneBank, SceneDef

FORMAT_VERSION = 1


def save_bank(bank: SceneBank, path: str | Path) -> None:
    """Write the scene bank as JSON."""
    doc = {
        "version": FORMAT_VERSION,
        "bank": {
            "lambdas": list(bank.bank.wavelengths),
            "thetas": list(bank.bank.thetas),
            "gamma": bank.bank.gamma,
            "sigma_over_lambda": bank.bank.sigma_over_lambda,
            "t1": bank.bank.t1,
            "inhibition": None
            if bank.inhibition is None
            else {
                "alpha": bank.inhibition.alpha,
                "surround_ratio": bank.inhibition.surround_ratio,
            },
        },
        "scenes": [
            {
                "name": scene.name,
                "detection_threshold": scene.detection_threshold,
                "filters": [
                    {
                        "name": f.name,
                        "tuples": [[t.wavelength, t.theta, t.rho, t.phi] for t in f.tuples],
                        "sigma0": f.sigma0,
                        "alpha_blur": f.alpha_blur,
                        "t2": f.t2,
                        "t3": f.t3,
                        "weight_sigma": f.weight_sigma,
                        "prototype_response": f.prototype_response,
                    }
                    for f in scene.filters
                ],
            }
            for scene in bank.scenes
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


class _Reader:
    """Typed field access with JSON-path context in every error message."""

    def __init__(self, obj, path: str):
        if not isinstance(obj, dict):
            raise BankFormatError(f"{path}: expected an object, got {type(obj).__name__}")
        self.obj = obj
        self.path = path

    def get(self, key, types, type_name):
        if key not in self.obj:
            raise BankFormatError(f"{self.path}.{key}: missing required field")
        value = self.obj[key]
        if not isinstance(value, types) or isinstance(value, bool):
            raise BankFormatError(
                f"{self.path}.{key}: expected {type_name}, got {type(value).__name__}"
            )
        return value

    def number(self, key) -> float:
        return float(self.get(key, (int, float), "a number"))

    def string(self, key) -> str:
        return self.get(key, str, "a string")

    def array(self, key) -> list:
        return self.get(key, list, "an array")


def _load_tuple(raw, path: str, bank: GaborBank) -> CosfireTuple:
    if not (isinstance(raw, list) and len(raw) == 4
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        raise BankFormatError(f"{path}: expected [lambda, theta, rho, phi] numbers")
    lam, theta, rho, phi = (float(v) for v in raw)
    if lam not in bank.wavelengths:
        raise BankFormatError(f"{path}: lambda {lam!r} not in the bank's wavelengths")
    if theta not in bank.thetas:
        raise BankFormatError(f"{path}: theta {theta!r} not in the bank's orientations")
    try:
        return CosfireTuple(lam, theta, rho, phi)
    except SceneFireError as exc:
        raise BankFormatError(f"{path}: {exc}") from exc


def _load_filter(raw, path: str, scene_name: str, bank: GaborBank) -> CosfireFilter:
    reader = _Reader(raw, path)
    tuples = tuple(
        _load_tuple(t, f"{path}.tuples[{i}]", bank)
        for i, t in enumerate(reader.array("tuples"))
    )
    weight_sigma = reader.get("weight_sigma", (str, int, float), 'a number or "uniform"')
    if isinstance(weight_sigma, (int, float)):
        weight_sigma = float(weight_sigma)
    try:
        return CosfireFilter(
            name=reader.string("name"),
            scene=scene_name,
            tuples=tuples,
            sigma0=reader.number("sigma0"),
            alpha_blur=reader.number("alpha_blur"),
            t2=reader.number("t2"),
            t3=reader.number("t3"),
            weight_sigma=weight_sigma,
            prototype_response=reader.number("prototype_response"),
        )
    except SceneFireError as exc:
        raise BankFormatError(f"{path}: {exc}") from exc


def load_bank(path: str | Path) -> SceneBank:
    """Read a scene bank back; rejects unknown versions and invariant violations."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BankFormatError(
            f"{path}: not valid JSON (line {exc.lineno}, column {exc.colno}: {exc.msg})"
        ) from exc

    root = _Reader(doc, "$")
    version = root.get("version", int, "an integer")
    if version != FORMAT_VERSION:
        raise BankVersionError(
            f"{path}: unsupported bank format version {version}, expected {FORMAT_VERSION}"
        )

    braw = _Reader(root.get("bank", dict, "an object"), "$.bank")
    try:
        gabor_bank = GaborBank(
            wavelengths=tuple(float(v) for v in braw.array("lambdas")),
            thetas=tuple(float(v) for v in braw.array("thetas")),
            gamma=braw.number("gamma"),
            sigma_over_lambda=braw.number("sigma_over_lambda"),
            t1=braw.number("t1"),
        )
    except SceneFireError as exc:
        raise BankFormatError(f"$.bank: {exc}") from exc

    inhibition = None
    raw_inh = braw.obj.get("inhibition")
    if raw_inh is not None:
        ireader = _Reader(raw_inh, "$.bank.inhibition")
        try:
            inhibition = InhibitionParams(
                alpha=ireader.number("alpha"),
                surround_ratio=ireader.number("surround_ratio"),
            )
        except SceneFireError as exc:
            raise BankFormatError(f"$.bank.inhibition: {exc}") from exc

    scenes = []
    for i, raw_scene in enumerate(root.array("scenes")):
        spath = f"$.scenes[{i}]"
        sreader = _Reader(raw_scene, spath)
        name = sreader.string("name")
        filters = tuple(
            _load_filter(rf, f"{spath}.filters[{j}]", name, gabor_bank)
            for j, rf in enumerate(sreader.array("filters"))
        )
        try:
            scenes.append(
                SceneDef(
                    name=name,
                    filters=filters,
                    detection_threshold=sreader.number("detection_threshold"),
                )
            )
        except SceneFireError as exc:
            raise BankFormatError(f"{spath}: {exc}") from exc

    try:
        return SceneBank(scenes=tuple(scenes), bank=gabor_bank, inhibition=inhibition)
    except SceneFireError as exc:
        raise BankFormatError(f"$.scenes: {exc}") from exc
