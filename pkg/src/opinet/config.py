"""Experiment configuration: dataclasses plus an INI file format.

Floats are written with repr so a save/load cycle reproduces the
configuration exactly.  Unknown sections or keys are rejected rather than
ignored; a config file that parses is a config file that runs.
"""

import configparser
import io
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .graph import GraphConfig
from .empirical import MixtureSpec

MODEL_VARIANTS = ("micro", "cont_unlabeled", "cont_labeled")

# fixed offsets decouple the independent random streams of one experiment
SEED_OFFSET_GRAPH = 11
SEED_OFFSET_SAMPLE = 22
SEED_OFFSET_NOISE = 33


@dataclass
class MicroParams:
    dt: float = 0.01
    t_end: float = 10.0
    noise_sigma: float = 0.0
    seed: int = None

    def validate(self):
        if self.dt <= 0:
            raise ConfigError("micro.dt: must be positive")
        if self.t_end <= 0:
            raise ConfigError("micro.t_end: must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("micro.noise_sigma: must be >= 0")
        return self


@dataclass
class ContinuumRunParams:
    dt: float = None
    t_end: float = 10.0
    eta_cutoff: float = 1e-10
    diffusion_sigma: float = 0.0
    birth_rate: float = 0.0
    death_rate: float = 0.0

    def validate(self):
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("continuum.dt: must be positive when given")
        if self.t_end <= 0:
            raise ConfigError("continuum.t_end: must be positive")
        if self.eta_cutoff <= 0:
            raise ConfigError("continuum.eta_cutoff: must be positive")
        if self.diffusion_sigma < 0:
            raise ConfigError("continuum.diffusion_sigma: must be >= 0")
        if self.birth_rate < 0 or self.death_rate < 0:
            raise ConfigError("continuum: birth/death rates must be >= 0")
        return self


@dataclass
class ExperimentConfig:
    graph: GraphConfig
    mixture: MixtureSpec
    micro: MicroParams = field(default_factory=MicroParams)
    continuum: ContinuumRunParams = field(default_factory=ContinuumRunParams)
    grid_size: int = 101
    model_variants: tuple = MODEL_VARIANTS
    mu_sweep: tuple = ()
    snapshot_times: tuple = ()
    sample_interval: float = 0.1
    output_dir: str = "out"
    seed: int = 0

    def validate(self):
        self.graph.validate()
        self.micro.validate()
        self.continuum.validate()
        if self.mixture.n_groups != self.graph.n_groups:
            raise ConfigError("mixture: community count must match the graph")
        if self.grid_size < 2:
            raise ConfigError("run.grid_size: need at least two cells")
        if not self.model_variants:
            raise ConfigError("run.model_variants: choose at least one variant")
        for v in self.model_variants:
            if v not in MODEL_VARIANTS:
                raise ConfigError("run.model_variants: unknown variant %r" % (v,))
        for mu in self.mu_sweep:
            if not 0.0 <= mu <= 1.0:
                raise ConfigError("run.mu_sweep: mixing values lie in [0, 1]")
        if self.sample_interval <= 0:
            raise ConfigError("run.sample_interval: must be positive")
        if not self.output_dir:
            raise ConfigError("run.output_dir: must be nonempty")
        return self

    def seeds(self):
        """Independent stream seeds derived from the master seed."""
        noise = self.micro.seed
        if noise is None:
            noise = self.seed + SEED_OFFSET_NOISE
        return {"graph": self.seed + SEED_OFFSET_GRAPH,
                "sample": self.seed + SEED_OFFSET_SAMPLE,
                "noise": noise}


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _float_list(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    return tuple(float(s) for s in items)


def _encode_mixture(mixture):
    out = {}
    for c, comps in enumerate(mixture.communities):
        out["community_%d" % (c + 1)] = ", ".join(
            "%s:%s:%s" % (repr(float(w)), repr(float(m)), repr(float(s)))
            for w, m, s in comps)
    return out


def _decode_component(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("mixture: component %r is not weight:center:sigma"
                          % (text,))
    return tuple(float(p) for p in parts)


def save_config(config, path_or_file):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    g = config.graph
    parser["graph"] = {"n_nodes": str(g.n_nodes), "n_groups": str(g.n_groups),
                       "mean_degree": _fmt(g.mean_degree),
                       "mixing_mu": _fmt(g.mixing_mu)}
    if g.proportions:
        parser["graph"]["proportions"] = ", ".join(
            repr(float(p)) for p in g.proportions)
    parser["mixture"] = _encode_mixture(config.mixture)
    m = config.micro
    parser["micro"] = {"dt": _fmt(m.dt), "t_end": _fmt(m.t_end),
                       "noise_sigma": _fmt(m.noise_sigma)}
    if m.seed is not None:
        parser["micro"]["seed"] = str(m.seed)
    c = config.continuum
    parser["continuum"] = {"t_end": _fmt(c.t_end),
                           "eta_cutoff": _fmt(c.eta_cutoff),
                           "diffusion_sigma": _fmt(c.diffusion_sigma),
                           "birth_rate": _fmt(c.birth_rate),
                           "death_rate": _fmt(c.death_rate)}
    if c.dt is not None:
        parser["continuum"]["dt"] = _fmt(c.dt)
    parser["run"] = {"grid_size": str(config.grid_size),
                     "model_variants": ", ".join(config.model_variants),
                     "sample_interval": _fmt(config.sample_interval),
                     "output_dir": config.output_dir,
                     "seed": str(config.seed)}
    if config.mu_sweep:
        parser["run"]["mu_sweep"] = ", ".join(
            repr(float(x)) for x in config.mu_sweep)
    if config.snapshot_times:
        parser["run"]["snapshot_times"] = ", ".join(
            repr(float(x)) for x in config.snapshot_times)
    if hasattr(path_or_file, "write"):
        parser.write(path_or_file)
    else:
        with open(path_or_file, "w") as fh:
            parser.write(fh)


_SECTION_KEYS = {
    "graph": {"n_nodes", "n_groups", "proportions", "mean_degree", "mixing_mu"},
    "micro": {"dt", "t_end", "noise_sigma", "seed"},
    "continuum": {"dt", "t_end", "eta_cutoff", "diffusion_sigma", "birth_rate",
                  "death_rate"},
    "run": {"grid_size", "model_variants", "mu_sweep", "snapshot_times",
            "sample_interval", "output_dir", "seed"},
}


def _check_keys(parser):
    for section in parser.sections():
        if section == "mixture":
            for key in parser["mixture"]:
                if not key.startswith("community_"):
                    raise ConfigError("config: unknown key mixture.%s" % key)
            continue
        if section not in _SECTION_KEYS:
            raise ConfigError("config: unknown section [%s]" % section)
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                raise ConfigError("config: unknown key %s.%s" % (section, key))


def load_config(path_or_file):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        if hasattr(path_or_file, "read"):
            parser.read_file(path_or_file)
        else:
            with open(path_or_file) as fh:
                parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError("config: %s" % exc)
    _check_keys(parser)
    for needed in ("graph", "mixture", "run"):
        if needed not in parser:
            raise ConfigError("config: missing section [%s]" % needed)
    try:
        gsec = parser["graph"]
        graph = GraphConfig(
            n_nodes=gsec.getint("n_nodes"),
            n_groups=gsec.getint("n_groups", fallback=1),
            proportions=_float_list(gsec.get("proportions", fallback="")),
            mean_degree=gsec.getfloat("mean_degree", fallback=10.0),
            mixing_mu=gsec.getfloat("mixing_mu", fallback=0.1))
        communities = []
        for c in range(len(parser["mixture"])):
            key = "community_%d" % (c + 1)
            if key not in parser["mixture"]:
                raise ConfigError("mixture: communities must be numbered 1..k")
            text = parser["mixture"][key]
            communities.append(tuple(_decode_component(part.strip())
                                     for part in text.split(",") if part.strip()))
        mixture = MixtureSpec(tuple(communities))
        msec = parser["micro"] if "micro" in parser else {}
        micro = MicroParams()
        if msec:
            micro = MicroParams(
                dt=msec.getfloat("dt", fallback=micro.dt),
                t_end=msec.getfloat("t_end", fallback=micro.t_end),
                noise_sigma=msec.getfloat("noise_sigma",
                                          fallback=micro.noise_sigma),
                seed=msec.getint("seed", fallback=None))
        csec = parser["continuum"] if "continuum" in parser else {}
        continuum = ContinuumRunParams()
        if csec:
            continuum = ContinuumRunParams(
                dt=csec.getfloat("dt", fallback=None),
                t_end=csec.getfloat("t_end", fallback=continuum.t_end),
                eta_cutoff=csec.getfloat("eta_cutoff",
                                         fallback=continuum.eta_cutoff),
                diffusion_sigma=csec.getfloat("diffusion_sigma", fallback=0.0),
                birth_rate=csec.getfloat("birth_rate", fallback=0.0),
                death_rate=csec.getfloat("death_rate", fallback=0.0))
        rsec = parser["run"]
        variants = tuple(s.strip() for s in
                         rsec.get("model_variants",
                                  fallback=", ".join(MODEL_VARIANTS)).split(",")
                         if s.strip())
        config = ExperimentConfig(
            graph=graph, mixture=mixture, micro=micro, continuum=continuum,
            grid_size=rsec.getint("grid_size", fallback=101),
            model_variants=variants,
            mu_sweep=_float_list(rsec.get("mu_sweep", fallback="")),
            snapshot_times=_float_list(rsec.get("snapshot_times", fallback="")),
            sample_interval=rsec.getfloat("sample_interval", fallback=0.1),
            output_dir=rsec.get("output_dir", fallback="out"),
            seed=rsec.getint("seed", fallback=0))
    except ValueError as exc:
        raise ConfigError("config: bad value: %s" % exc)
    return config.validate()


def config_to_string(config):
    buf = io.StringIO()
    save_config(config, buf)
    return buf.getvalue()


def config_from_string(text):
    return load_config(io.StringIO(text))


def preset_three_communities():
    """Three communities with bimodal tails and a tight center group."""
    return ExperimentConfig(
        graph=GraphConfig(n_nodes=200, n_groups=3, mean_degree=10.0,
                          mixing_mu=0.05),
        mixture=MixtureSpec.three_communities(),
        micro=MicroParams(dt=0.01, t_end=10.0),
        continuum=ContinuumRunParams(t_end=10.0),
        grid_size=101,
        mu_sweep=(0.001, 0.01, 0.1, 0.5),
        output_dir="out_three_communities",
        seed=1)


def preset_crossing():
    """Two half-and-half communities whose bulks swap sides over time."""
    return ExperimentConfig(
        graph=GraphConfig(n_nodes=200, n_groups=2, mean_degree=10.0,
                          mixing_mu=0.001),
        mixture=MixtureSpec.crossing(),
        micro=MicroParams(dt=0.01, t_end=8.0),
        continuum=ContinuumRunParams(t_end=8.0),
        grid_size=101,
        mu_sweep=(0.001, 0.01, 0.1, 0.5),
        output_dir="out_crossing",
        seed=2)


PRESETS = {"three_communities": preset_three_communities,
           "crossing": preset_crossing}


def replace_mixing(config, mu):
    """Copy of config with the graph mixing parameter replaced."""
    return replace(config, graph=replace(config.graph, mixing_mu=mu))
