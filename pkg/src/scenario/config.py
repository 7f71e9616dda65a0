"""Scenario files: TOML documents validated by pydantic models

Every section rejects unknown keys. `--set section.key=value` overrides are
applied to the raw document before validation, so overridden values pass
through the same checks as file values.
"""

import copy
import logging
import tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from src.cabin.geometry import BORESIGHTS, CabinGeometry, default_receivers, default_transmitters
from src.cabin.raytracer import CabinScenario
from src.constellation.manager import density_policy
from src.constellation.search import ElementTemplate, InsertionPolicy
from src.errors import ConfigError, ValidationError
from src.flight import FlightPath, FlightPlanModel, build_flight
from src.orbital.elements import KeplerianElements
from src.visibility import VisibilityMask

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioSection(_Section):
    mode: Literal["coverage", "cabin"]
    name: str = "scenario"
    output_dir: Optional[str] = None


class TemplateModel(_Section):
    sma_m: float = 7.2e6
    eccentricity: float = 0.05
    inclination_deg: float = 70.0
    arg_periapsis_deg: float = 0.0


class PolicyModel(_Section):
    preset: Optional[Literal["minimal", "standard", "dense"]] = None
    connect_timeout_s: float = 120.0
    max_satellites: Optional[int] = None
    search_raan_step_deg: float = 1.0
    search_anomaly_step_deg: float = 1.0
    lookahead_s: Optional[float] = None


class MaskModel(_Section):
    min_elevation_deg: float = 10.0
    beam_half_angle_deg: float = 60.0


class SatelliteModel(_Section):
    raan_deg: float
    true_anomaly_deg: float


class ConstellationModel(_Section):
    insertion: Literal["sequential", "parallel"] = "sequential"
    template: TemplateModel = Field(default_factory=TemplateModel)
    policy: PolicyModel = Field(default_factory=PolicyModel)
    mask: MaskModel = Field(default_factory=MaskModel)
    satellites: list[SatelliteModel] = Field(default_factory=list)


class GeometryModel(_Section):
    length_m: float = 45.0
    width_m: float = 5.6
    height_m: float = 2.4
    reflection_loss_db: Union[float, list[float]] = 1.0


class SbrModel(_Section):
    frequency_hz: float = 5.8e9
    angular_separation_deg: float = 1.0
    max_reflections: int = 2
    capture_scale: float = 1.0
    dump_paths: bool = False


class LayoutModel(_Section):
    n_transmitters: int = 4
    ceiling_offset_m: float = 0.1
    rows: int = 20
    columns: int = 2
    seats_per_cell: int = 3
    seat_height_m: float = 1.1
    seat_pitch_m: float = 0.5
    ue_array: Literal["2x2", "1x4"] = "2x2"
    ue_boresight: Literal["isotropic", "ceiling", "forward"] = "isotropic"
    tx_steering: bool = True
    ue_steering: bool = False
    optimize_placement: bool = False
    placement_candidates: int = 9


class CabinModel(_Section):
    geometry: GeometryModel = Field(default_factory=GeometryModel)
    sbr: SbrModel = Field(default_factory=SbrModel)
    layout: LayoutModel = Field(default_factory=LayoutModel)


class ScenarioConfig(_Section):
    scenario: ScenarioSection
    flight: Optional[FlightPlanModel] = None
    constellation: Optional[ConstellationModel] = None
    cabin: Optional[CabinModel] = None


@dataclass
class LoadedScenario:
    """Validated configuration plus where it came from"""

    config: ScenarioConfig
    source: Path
    overrides: list[str] = field(default_factory=list)

    @property
    def mode(self) -> str:
        return self.config.scenario.mode

    @property
    def name(self) -> str:
        return self.config.scenario.name

    def resolved(self) -> dict:
        """Fully-resolved configuration, defaults included"""
        return self.config.model_dump(mode="json")

    def flight(self) -> FlightPath:
        return build_flight(self.config.flight, base_dir=self.source.parent, file=str(self.source))

    def mask(self) -> VisibilityMask:
        mask = self.config.constellation.mask
        return _checked(lambda: VisibilityMask(**mask.model_dump()), self.source, "constellation.mask")

    def policy(self) -> InsertionPolicy:
        constellation = self.config.constellation
        template = _checked(lambda: ElementTemplate(**constellation.template.model_dump()),
                            self.source, "constellation.template")
        policy = constellation.policy
        settings = policy.model_dump(exclude={"preset", "max_satellites"})
        if policy.preset is not None:
            base = density_policy(policy.preset, template)
            default = base.max_satellites
        else:
            default = InsertionPolicy().max_satellites
        max_satellites = policy.max_satellites if policy.max_satellites is not None else default
        return _checked(lambda: InsertionPolicy(max_satellites=max_satellites, template=template, **settings),
                        self.source, "constellation.policy")

    def fixed_satellites(self, epoch_s: float) -> list[KeplerianElements]:
        template = self.policy().template
        return [
            _checked(lambda: template.elements(s.raan_deg, s.true_anomaly_deg, epoch_s),
                     self.source, "constellation.satellites")
            for s in self.config.constellation.satellites
        ]

    def cabin(self) -> tuple[CabinScenario, LayoutModel]:
        cabin = self.config.cabin or CabinModel()
        layout = cabin.layout
        section = "cabin.geometry"

        def build() -> CabinScenario:
            losses = cabin.geometry.reflection_loss_db
            geometry = CabinGeometry(
                length_m=cabin.geometry.length_m,
                width_m=cabin.geometry.width_m,
                height_m=cabin.geometry.height_m,
                reflection_loss_db=tuple(losses) if isinstance(losses, list) else losses,
            )
            transmitters = default_transmitters(geometry, layout.n_transmitters, layout.ceiling_offset_m)
            if not layout.tx_steering:
                transmitters = [replace(t, steerable=False, boresight=BORESIGHTS["floor"]) for t in transmitters]
            receivers = default_receivers(
                geometry,
                rows=layout.rows,
                columns=layout.columns,
                seats_per_cell=layout.seats_per_cell,
                seat_height_m=layout.seat_height_m,
                seat_pitch_m=layout.seat_pitch_m,
                ue_layout=layout.ue_array,
                steerable=layout.ue_steering,
                boresight=BORESIGHTS[layout.ue_boresight],
            )
            return CabinScenario(
                geometry=geometry,
                transmitters=tuple(transmitters),
                receivers=tuple(receivers),
                frequency_hz=cabin.sbr.frequency_hz,
                angular_separation_deg=cabin.sbr.angular_separation_deg,
                max_reflections=cabin.sbr.max_reflections,
                capture_scale=cabin.sbr.capture_scale,
            )

        return _checked(build, self.source, section), layout


def _checked(factory, source: Path, section: str):
    # Domain validation errors gain the file and section they came from
    try:
        return factory()
    except ValidationError as e:
        if e.file is not None:
            raise
        raise ValidationError(e.message, file=str(source), section=section, key=e.key) from e


def parse_scalar(text: str):
    """Interpret an override value as a TOML scalar, falling back to a string"""
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(document: dict, override: str) -> dict:
    """Apply one `section.key=value` override to a raw scenario document

    Returns:
        New document; the input is left untouched
    """
    if "=" not in override:
        raise ConfigError(f"override '{override}' must look like section.key=value")
    dotted, raw = override.split("=", 1)
    parts = [p.strip() for p in dotted.strip().split(".")]
    if len(parts) < 2 or not all(parts):
        raise ConfigError(f"override key '{dotted}' must name a section and a key")
    updated = copy.deepcopy(document)
    node = updated
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override path '{dotted}' crosses a value", section=part)
        node = child
    node[parts[-1]] = parse_scalar(raw.strip())
    return updated


def _raise_pydantic(error: PydanticValidationError, source: Path):
    first = error.errors()[0]
    location = [str(part) for part in first["loc"]]
    section = ".".join(location[:-1]) or None
    key = location[-1] if location else None
    raise ConfigError(first["msg"], file=str(source), section=section, key=key) from error


def load_config(path, overrides: Sequence[str] = ()) -> LoadedScenario:
    """Read, override and validate a scenario file

    Workflow:
    1. Parse the TOML document
    2. Apply every `--set` override in order
    3. Validate with pydantic (unknown keys rejected)
    4. Check mode exclusivity and referenced files

    Raises:
        ConfigError: missing file, bad TOML, unknown or invalid keys
    """
    source = Path(path)
    if not source.is_file():
        raise ConfigError("scenario file not found", file=str(source))
    try:
        with open(source, "rb") as f:
            document = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"cannot parse TOML: {e}", file=str(source)) from e

    for override in overrides:
        try:
            document = apply_override(document, override)
        except ConfigError as e:
            raise ConfigError(str(e), file=str(source), section=e.section, key=e.key) from e

    try:
        config = ScenarioConfig.model_validate(document)
    except PydanticValidationError as e:
        _raise_pydantic(e, source)

    mode = config.scenario.mode
    if mode == "coverage":
        if config.cabin is not None:
            raise ConfigError("coverage scenarios take no [cabin] section", file=str(source), section="cabin")
        if config.flight is None:
            raise ConfigError("coverage scenarios need a [flight] section", file=str(source), section="flight")
        if config.constellation is None:
            config.constellation = ConstellationModel()
        constellation = config.constellation
        if constellation.insertion == "parallel" and not constellation.satellites:
            raise ConfigError("parallel insertion needs [[constellation.satellites]]",
                              file=str(source), section="constellation", key="satellites")
        if constellation.insertion == "sequential" and constellation.satellites:
            raise ConfigError("predefined satellites require insertion = \"parallel\"",
                              file=str(source), section="constellation", key="insertion")
        if config.flight.track_csv:
            track = Path(config.flight.track_csv)
            if not track.is_absolute():
                track = source.parent / track
            if not track.is_file():
                raise ConfigError(f"track file {track} not found", file=str(source),
                                  section="flight", key="track_csv")
    else:
        for section in ("flight", "constellation"):
            if getattr(config, section) is not None:
                raise ConfigError(f"cabin scenarios take no [{section}] section", file=str(source), section=section)
        if config.cabin is None:
            config.cabin = CabinModel()

    logger.info(f"Loaded {mode} scenario '{config.scenario.name}' from {source}"
                + (f" with {len(overrides)} overrides" if overrides else ""))
    return LoadedScenario(config=config, source=source, overrides=list(overrides))
