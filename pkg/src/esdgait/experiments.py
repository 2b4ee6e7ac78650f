"""Config-driven experiment pipeline.

One JSON config file describes a synthetic cohort and modelling choices;
the functions here turn it into reproducible artifacts: a dataset manifest
of signal records, an MFCC feature table, a trained forest with its
cross-validation report, and plot-ready report CSVs. Every artifact is a
pure function of (config, seed), so reruns are byte-identical.
"""

from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dsp, forest, io, legshake, simkit
from .errors import DegenerateSignalError, ValidationError

log = logging.getLogger("esdgait")

TASKS = ("identify_person", "classify_mood", "legshake")

# which meta label becomes the class column for each task
TASK_LABEL_KEY = {
    "identify_person": "person_id",
    "classify_mood": "mood",
    "legshake": "activity",
}

# fixed foot-to-floor electrode pair used for every synthesized record
WALK_CAPACITANCE = simkit.CapacitanceModel(c_f1=200e-12, c_f2=200e-12)
ELECTRODE = simkit.ElectrodeModel()


@dataclass(frozen=True)
class WalkCohort:
    """Cohort grid for the walking tasks: persons x moods x repetitions."""

    persons: dict[str, simkit.GaitProfile]
    moods: dict[str, simkit.MoodProfile | None]
    plant_types: tuple[str, ...]
    locations: tuple[str, ...]
    samples_per_cell: int
    noise_std: float
    start_distance: float
    end_distance: float
    frequency_jitter: float


@dataclass(frozen=True)
class ShakeCohort:
    """Record grid for the leg-shake task plus optional noise-only records."""

    shake_frequencies: tuple[float, ...]
    onsets: tuple[float, ...]
    duration: float
    snr_db: float | None
    samples_per_cell: int
    noise_only: int


@dataclass(frozen=True)
class SearchSpec:
    space: dict[str, list]
    n_iter: int


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    task: str
    dataset: WalkCohort | ShakeCohort | None
    mfcc: dsp.MfccConfig
    include_categoricals: bool
    forest_params: forest.ForestParams
    search: SearchSpec | None
    cv_folds: int
    detector: legshake.DetectorConfig

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValidationError("experiment config must be a JSON object")
        allowed = {
            "seed", "task", "dataset", "mfcc", "forest", "search",
            "detector", "cv_folds", "include_categoricals",
        }
        unknown = set(raw) - allowed
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in raw:
            raise ValidationError("config must set an integer seed")
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        task = raw.get("task")
        if task not in TASKS:
            raise ValidationError(f"task must be one of {TASKS}, got {task!r}")
        cv_folds = raw.get("cv_folds", 10)
        if isinstance(cv_folds, bool) or not isinstance(cv_folds, int) or cv_folds < 2:
            raise ValidationError("cv_folds must be an integer >= 2")
        include_categoricals = raw.get("include_categoricals", False)
        if not isinstance(include_categoricals, bool):
            raise ValidationError("include_categoricals must be a boolean")

        try:
            mfcc = dsp.MfccConfig(**raw.get("mfcc", {}))
        except TypeError as exc:
            raise ValidationError(f"bad mfcc section: {exc}") from None

        forest_section = dict(raw.get("forest", {}))
        forest_section.setdefault("seed", seed)
        try:
            forest_params = forest.ForestParams(**forest_section)
        except TypeError as exc:
            raise ValidationError(f"bad forest section: {exc}") from None

        search = None
        if "search" in raw:
            search = _parse_search(raw["search"])

        detector_section = raw.get("detector", {})
        if not isinstance(detector_section, dict):
            raise ValidationError("detector section must be an object")
        detector = legshake.DetectorConfig.from_dict(detector_section)

        dataset = None
        if "dataset" in raw:
            if task == "legshake":
                dataset = _parse_shake_cohort(raw["dataset"])
            else:
                dataset = _parse_walk_cohort(raw["dataset"])
        return cls(
            seed=seed,
            task=task,
            dataset=dataset,
            mfcc=mfcc,
            include_categoricals=include_categoricals,
            forest_params=forest_params,
            search=search,
            cv_folds=cv_folds,
            detector=detector,
        )


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    if seed_override is not None:
        if not isinstance(raw, dict):
            raise ValidationError("experiment config must be a JSON object")
        raw["seed"] = seed_override
    return ExperimentConfig.from_dict(raw)


def _parse_search(section) -> SearchSpec:
    if not isinstance(section, dict):
        raise ValidationError("search section must be an object")
    unknown = set(section) - {"space", "n_iter"}
    if unknown:
        raise ValidationError(f"unknown search keys: {sorted(unknown)}")
    n_iter = section.get("n_iter")
    if isinstance(n_iter, bool) or not isinstance(n_iter, int) or n_iter < 1:
        raise ValidationError("search.n_iter must be an integer >= 1")
    space = section.get("space")
    if space is None:
        space = {name: list(values) for name, values in forest.DEFAULT_SEARCH_SPACE.items()}
    if not isinstance(space, dict) or not space:
        raise ValidationError("search.space must be a non-empty object")
    valid_axes = set(forest.ForestParams.__dataclass_fields__) - {"seed"}
    for name, values in space.items():
        if name not in valid_axes:
            raise ValidationError(f"unknown search axis: {name}")
        if not isinstance(values, list) or not values:
            raise ValidationError(f"search axis {name} needs a non-empty list")
    return SearchSpec(space=space, n_iter=n_iter)


def _parse_walk_cohort(section) -> WalkCohort:
    if not isinstance(section, dict):
        raise ValidationError("dataset section must be an object")
    allowed = {
        "persons", "moods", "plant_types", "locations", "samples_per_cell",
        "noise_std", "start_distance", "end_distance", "frequency_jitter",
    }
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown dataset keys: {sorted(unknown)}")
    persons_raw = section.get("persons")
    if not isinstance(persons_raw, dict) or not persons_raw:
        raise ValidationError("dataset.persons must map names to gait parameters")
    persons = {}
    for name, params in persons_raw.items():
        if not isinstance(params, dict):
            raise ValidationError(f"person {name!r} must be an object of gait parameters")
        try:
            persons[str(name)] = simkit.GaitProfile(**params)
        except TypeError as exc:
            raise ValidationError(f"person {name!r}: {exc}") from None
    moods_raw = section.get("moods", {"neutral": {}})
    if not isinstance(moods_raw, dict) or not moods_raw:
        raise ValidationError("dataset.moods must map names to mood factors")
    moods: dict[str, simkit.MoodProfile | None] = {}
    for name, params in moods_raw.items():
        if not isinstance(params, dict):
            raise ValidationError(f"mood {name!r} must be an object of factors")
        extra = set(params) - {"speed_factor", "amplitude_factor", "step_frequency_factor"}
        if extra:
            raise ValidationError(f"mood {name!r} has unknown keys: {sorted(extra)}")
        factors = (
            float(params.get("speed_factor", 1.0)),
            float(params.get("amplitude_factor", 1.0)),
            float(params.get("step_frequency_factor", 1.0)),
        )
        if factors == (1.0, 1.0, 1.0):
            # identity factors leave the gait untouched; any label is fine
            moods[str(name)] = None
        else:
            moods[str(name)] = simkit.MoodProfile(str(name), *factors)
    samples_per_cell = section.get("samples_per_cell")
    if isinstance(samples_per_cell, bool) or not isinstance(samples_per_cell, int):
        raise ValidationError("dataset.samples_per_cell must be an integer")
    if samples_per_cell < 1:
        raise ValidationError("dataset.samples_per_cell must be >= 1")
    plant_types = _string_list(section.get("plant_types", ["pothos"]), "plant_types")
    locations = _string_list(section.get("locations", ["lab"]), "locations")
    noise_std = float(section.get("noise_std", 0.0))
    if noise_std < 0:
        raise ValidationError("dataset.noise_std must be >= 0")
    start = float(section.get("start_distance", 3.0))
    end = float(section.get("end_distance", 0.6))
    if start <= 0 or end <= 0:
        raise ValidationError("walk distances must be positive")
    if start == end:
        raise ValidationError("start_distance and end_distance must differ")
    jitter = float(section.get("frequency_jitter", 0.02))
    if not 0 <= jitter < 0.5:
        raise ValidationError("frequency_jitter must lie in [0, 0.5)")
    return WalkCohort(
        persons=persons,
        moods=moods,
        plant_types=plant_types,
        locations=locations,
        samples_per_cell=samples_per_cell,
        noise_std=noise_std,
        start_distance=start,
        end_distance=end,
        frequency_jitter=jitter,
    )


def _parse_shake_cohort(section) -> ShakeCohort:
    if not isinstance(section, dict):
        raise ValidationError("dataset section must be an object")
    allowed = {
        "shake_frequencies", "onsets", "duration", "snr_db",
        "samples_per_cell", "noise_only",
    }
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown dataset keys: {sorted(unknown)}")
    freqs = tuple(float(v) for v in section.get("shake_frequencies", []))
    onsets = tuple(float(v) for v in section.get("onsets", []))
    if not freqs or not onsets:
        raise ValidationError("legshake dataset needs shake_frequencies and onsets")
    duration = float(section.get("duration", 8.0))
    if duration <= max(onsets):
        raise ValidationError("duration must exceed every onset")
    samples_per_cell = section.get("samples_per_cell")
    if isinstance(samples_per_cell, bool) or not isinstance(samples_per_cell, int):
        raise ValidationError("dataset.samples_per_cell must be an integer")
    if samples_per_cell < 1:
        raise ValidationError("dataset.samples_per_cell must be >= 1")
    noise_only = section.get("noise_only", 0)
    if isinstance(noise_only, bool) or not isinstance(noise_only, int) or noise_only < 0:
        raise ValidationError("dataset.noise_only must be an integer >= 0")
    snr_db = section.get("snr_db")
    if snr_db is not None:
        snr_db = float(snr_db)
    if noise_only > 0 and snr_db is None:
        raise ValidationError("noise_only records need snr_db to set the noise level")
    return ShakeCohort(
        shake_frequencies=freqs,
        onsets=onsets,
        duration=duration,
        snr_db=snr_db,
        samples_per_cell=samples_per_cell,
        noise_only=noise_only,
    )


def _string_list(value, name: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
        raise ValidationError(f"dataset.{name} must be a non-empty list of strings")
    return tuple(value)


# ---------------------------------------------------------------------------
# record planning and synthesis


@dataclass(frozen=True)
class WalkPlan:
    index: int
    person_id: str
    mood: str
    gait: simkit.GaitProfile
    mood_profile: simkit.MoodProfile | None
    plant_type: str
    location: str
    start_distance: float
    end_distance: float
    schedule_phase: float
    noise_std: float
    noise_seed: int


@dataclass(frozen=True)
class ShakePlan:
    index: int
    shake_frequency: float
    onset: float
    duration: float
    snr_db: float | None
    noise_seed: int


@dataclass(frozen=True)
class NoisePlan:
    index: int
    duration: float
    noise_std: float
    noise_seed: int


def build_plans(config: ExperimentConfig) -> list:
    if config.dataset is None:
        raise ValidationError("config has no dataset section")
    if isinstance(config.dataset, WalkCohort):
        return _walk_plans(config.seed, config.dataset)
    return _shake_plans(config.seed, config.dataset)


def _walk_plans(seed: int, cohort: WalkCohort) -> list[WalkPlan]:
    plans: list[WalkPlan] = []
    cells = list(itertools.product(sorted(cohort.persons), sorted(cohort.moods)))
    index = 0
    for cell_index, (person, mood) in enumerate(cells):
        base = cohort.persons[person]
        for rep in range(cohort.samples_per_cell):
            rng = np.random.default_rng(np.random.SeedSequence([seed, cell_index, rep]))
            freq_scale = 1.0 + cohort.frequency_jitter * float(rng.uniform(-1.0, 1.0))
            speed_scale = 1.0 + cohort.frequency_jitter * float(rng.uniform(-1.0, 1.0))
            gait = replace(
                base,
                step_frequency=base.step_frequency * freq_scale,
                walking_speed=base.walking_speed * speed_scale,
            )
            phase = float(rng.uniform(0.0, 1.0 / gait.step_frequency))
            plant = cohort.plant_types[int(rng.integers(len(cohort.plant_types)))]
            location = cohort.locations[int(rng.integers(len(cohort.locations)))]
            if rep % 2 == 0:
                start, end = cohort.start_distance, cohort.end_distance
            else:
                start, end = cohort.end_distance, cohort.start_distance
            plans.append(
                WalkPlan(
                    index=index,
                    person_id=person,
                    mood=mood,
                    gait=gait,
                    mood_profile=cohort.moods[mood],
                    plant_type=plant,
                    location=location,
                    start_distance=start,
                    end_distance=end,
                    schedule_phase=phase,
                    noise_std=cohort.noise_std,
                    noise_seed=int(rng.integers(2**32)),
                )
            )
            index += 1
    return plans


def _shake_plans(seed: int, cohort: ShakeCohort) -> list:
    plans: list = []
    cells = list(itertools.product(cohort.shake_frequencies, cohort.onsets))
    index = 0
    for cell_index, (freq, onset) in enumerate(cells):
        for rep in range(cohort.samples_per_cell):
            rng = np.random.default_rng(np.random.SeedSequence([seed, cell_index, rep]))
            plans.append(
                ShakePlan(
                    index=index,
                    shake_frequency=freq,
                    onset=onset,
                    duration=cohort.duration,
                    snr_db=cohort.snr_db,
                    noise_seed=int(rng.integers(2**32)),
                )
            )
            index += 1
    reference_std = _shake_noise_std(cohort) if cohort.noise_only else 0.0
    for extra in range(cohort.noise_only):
        rng = np.random.default_rng(np.random.SeedSequence([seed, len(cells) + extra, 0]))
        plans.append(
            NoisePlan(
                index=index,
                duration=cohort.duration,
                noise_std=reference_std,
                noise_seed=int(rng.integers(2**32)),
            )
        )
        index += 1
    return plans


def _shake_noise_std(cohort: ShakeCohort) -> float:
    """Noise level matching the configured SNR against a mid-band shake."""
    freq = float(np.mean(cohort.shake_frequencies))
    onset = float(min(cohort.onsets))
    clean = simkit.synth_legshake(
        freq, cohort.duration, onset, WALK_CAPACITANCE, ELECTRODE, noise_std=0.0, seed=0
    )
    post = clean.samples[int(onset * clean.sample_rate):]
    rms = float(np.sqrt(np.mean(post**2)))
    return rms / (10.0 ** (cohort.snr_db / 20.0))


def synthesize_record(plan) -> simkit.SignalRecord:
    if isinstance(plan, WalkPlan):
        return _synthesize_walk(plan)
    if isinstance(plan, ShakePlan):
        return _synthesize_shake(plan)
    if isinstance(plan, NoisePlan):
        return _synthesize_noise(plan)
    raise ValidationError(f"unknown plan type: {type(plan).__name__}")


def _synthesize_walk(plan: WalkPlan) -> simkit.SignalRecord:
    mood = plan.mood_profile
    traj, duration = simkit.straight_walk(
        plan.gait, mood, plan.start_distance, plan.end_distance
    )
    labels = {
        "person_id": plan.person_id,
        "mood": plan.mood,
        "plant_type": plan.plant_type,
        "location": plan.location,
        "activity": "walk",
        "seed": plan.noise_seed,
        "generator_params": {
            "step_frequency": plan.gait.step_frequency,
            "walking_speed": plan.gait.walking_speed,
            "duty_cycle": plan.gait.duty_cycle,
            "vertical_amplitude": plan.gait.vertical_amplitude,
            "speed_factor": mood.speed_factor if mood else 1.0,
            "amplitude_factor": mood.amplitude_factor if mood else 1.0,
            "step_frequency_factor": mood.step_frequency_factor if mood else 1.0,
            "start_distance": plan.start_distance,
            "end_distance": plan.end_distance,
            "schedule_phase": plan.schedule_phase,
            "duration": duration,
            "noise_std": plan.noise_std,
        },
    }
    return simkit.synth_walk(
        plan.gait,
        mood,
        traj,
        WALK_CAPACITANCE,
        ELECTRODE,
        duration,
        noise_std=plan.noise_std,
        seed=plan.noise_seed,
        schedule_phase=plan.schedule_phase,
        labels=labels,
    )


def _synthesize_shake(plan: ShakePlan) -> simkit.SignalRecord:
    if plan.snr_db is None:
        noise_std = 0.0
    else:
        clean = simkit.synth_legshake(
            plan.shake_frequency, plan.duration, plan.onset,
            WALK_CAPACITANCE, ELECTRODE, noise_std=0.0, seed=0,
        )
        post = clean.samples[int(plan.onset * clean.sample_rate):]
        noise_std = float(np.sqrt(np.mean(post**2))) / (10.0 ** (plan.snr_db / 20.0))
    labels = {
        "activity": "legshake",
        "seed": plan.noise_seed,
        "generator_params": {
            "shake_frequency": plan.shake_frequency,
            "onset": plan.onset,
            "duration": plan.duration,
            "snr_db": plan.snr_db,
            "noise_std": noise_std,
        },
    }
    return simkit.synth_legshake(
        plan.shake_frequency, plan.duration, plan.onset,
        WALK_CAPACITANCE, ELECTRODE,
        noise_std=noise_std, seed=plan.noise_seed, labels=labels,
    )


def _synthesize_noise(plan: NoisePlan) -> simkit.SignalRecord:
    rng = np.random.default_rng(plan.noise_seed)
    n = int(round(plan.duration * simkit.SAMPLE_RATE)) - 2
    samples = rng.normal(0.0, plan.noise_std, n)
    labels = {
        "activity": "noise",
        "seed": plan.noise_seed,
        "generator_params": {"duration": plan.duration, "noise_std": plan.noise_std},
    }
    return simkit.SignalRecord(
        samples=samples, sample_rate=simkit.SAMPLE_RATE, labels=labels
    )


def run_simulate(config: ExperimentConfig, out_dir, jobs: int = 1, quiet: bool = False) -> Path:
    """Synthesize the cohort and write records plus dataset.json manifest."""
    plans = build_plans(config)
    out = Path(out_dir)
    records_dir = out / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(synthesize_record, plans, chunksize=4))
    else:
        records = [synthesize_record(plan) for plan in plans]
    entries = []
    for plan, record in zip(plans, records):
        stem = f"rec_{plan.index:04d}"
        signal_rel = f"records/{stem}.sig.csv"
        meta_rel = f"records/{stem}.meta.json"
        io.write_record(record, out / signal_rel, out / meta_rel)
        entries.append({"signal_path": signal_rel, "meta_path": meta_rel})
    manifest_path = out / "dataset.json"
    io.write_manifest(manifest_path, entries)
    if not quiet:
        log.info("wrote %d records and %s", len(entries), manifest_path)
    return manifest_path


# ---------------------------------------------------------------------------
# featurization


def run_featurize(
    manifest_path, config: ExperimentConfig, out_dir, quiet: bool = False
) -> tuple[Path, list[dict]]:
    """Extract one feature row per record; returns (features path, rejects)."""
    entries = io.read_manifest(manifest_path)
    if not entries:
        raise ValidationError("manifest lists no records")
    records = [io.read_record(e["signal_path"], e["meta_path"]) for e in entries]
    rates = {record.sample_rate for record in records}
    if len(rates) != 1:
        raise ValidationError(f"records mix sample rates: {sorted(rates)}")
    records = dsp.trim_to_common_length(records)
    label_key = TASK_LABEL_KEY[config.task]
    maps = dsp.build_category_maps(records) if config.include_categoricals else None
    rows: list[np.ndarray] = []
    labels: list[str] = []
    names: tuple[str, ...] | None = None
    rejects: list[dict] = []
    for entry, record in zip(entries, records):
        try:
            vector = dsp.featurize(
                record, config.mfcc, config.include_categoricals, maps
            )
        except DegenerateSignalError as exc:
            rejects.append({"signal_path": str(entry["signal_path"]), "reason": str(exc)})
            continue
        label = record.labels.get(label_key)
        if label is None:
            raise ValidationError(
                f"record {entry['signal_path']} has no {label_key} label for task {config.task}"
            )
        rows.append(vector.values)
        labels.append(str(label))
        if names is None:
            names = vector.feature_names
    if not rows:
        raise ValidationError("every record was rejected as degenerate")
    if rejects and not quiet:
        log.warning("excluded %d degenerate record(s)", len(rejects))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features_path = out / "features.csv"
    io.write_features(features_path, np.asarray(rows), names, labels)
    sidecar = {
        "task": config.task,
        "label_key": label_key,
        "include_categoricals": config.include_categoricals,
        "mfcc": config.mfcc.to_dict(),
        "mfcc_fingerprint": io.mfcc_fingerprint(config.mfcc),
        "n_records": len(labels),
        "rejects": rejects,
    }
    io.atomic_write_json(_sidecar_path(features_path), sidecar)
    return features_path, rejects


def _sidecar_path(features_path) -> Path:
    features_path = Path(features_path)
    return features_path.parent / (features_path.stem + ".meta.json")


def dataset_from_features(matrix, feature_names, labels) -> forest.Dataset:
    class_names = tuple(sorted(set(labels)))
    index = {name: i for i, name in enumerate(class_names)}
    y = np.array([index[label] for label in labels], dtype=np.int64)
    return forest.Dataset(
        features=np.asarray(matrix, dtype=float),
        labels=y,
        feature_names=tuple(feature_names),
        class_names=class_names,
    )


def _stored_fingerprint(features_path, config: ExperimentConfig) -> str:
    """Fingerprint of the MFCC settings that produced a features file.

    The featurize sidecar is authoritative when present; otherwise the
    config's own mfcc section is assumed to match.
    """
    sidecar = _sidecar_path(features_path)
    if sidecar.exists():
        stored = io.read_json(sidecar)
        if isinstance(stored, dict) and isinstance(stored.get("mfcc_fingerprint"), str):
            return stored["mfcc_fingerprint"]
    return io.mfcc_fingerprint(config.mfcc)


# ---------------------------------------------------------------------------
# training, evaluation, reporting


def run_train(
    features_path, config: ExperimentConfig, out_dir, jobs: int = 1, quiet: bool = False
) -> tuple[forest.EvalReport, Path, Path]:
    """Cross-validate, fit on all rows, persist model.rfj + eval_report.json."""
    matrix, names, labels = io.read_features(features_path)
    data = dataset_from_features(matrix, names, labels)
    params = config.forest_params
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.search is not None:
        params, trials = forest.randomized_search(
            data,
            config.search.space,
            config.search.n_iter,
            k=config.cv_folds,
            seed=config.seed,
            jobs=jobs,
        )
        io.atomic_write_json(out / "search_trials.json", trials)
        if not quiet:
            log.info("search picked %s", params)
    report, model = forest.cross_validate(
        data, params, k=config.cv_folds, seed=config.seed, jobs=jobs, with_model=True
    )
    model_path = out / "model.rfj"
    forest.save_model(model, model_path, mfcc_fingerprint=_stored_fingerprint(features_path, config))
    report_path = out / "eval_report.json"
    io.atomic_write_json(report_path, report.to_dict())
    if not quiet:
        log.info(
            "pooled accuracy %.4f, kappa %.4f over %d folds",
            report.accuracy, report.cohens_kappa, config.cv_folds,
        )
    return report, model_path, report_path


def _report_from_predictions(y_true, proba, importances) -> forest.EvalReport:
    k = proba.shape[1]
    predicted = np.argmax(proba, axis=1)
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (y_true, predicted), 1)
    accuracy = float(np.mean(predicted == y_true))
    return forest.EvalReport(
        accuracy=accuracy,
        cohens_kappa=forest.cohens_kappa(predicted, y_true),
        auroc=forest.auroc(proba, y_true),
        confusion_matrix=confusion,
        per_fold_accuracies=(accuracy,),
        importances=np.asarray(importances, dtype=float),
    )


def run_eval(
    features_path,
    config: ExperimentConfig,
    out_dir,
    model_path=None,
    holdout: bool = False,
    jobs: int = 1,
    quiet: bool = False,
) -> tuple[forest.EvalReport, Path]:
    """Evaluate on a feature table.

    holdout=True: stratified 80/20 split, fit on the large part, score the
    small part. model_path: score an existing model on these rows. Neither:
    full cross-validation (same numbers as run_train, nothing persisted but
    the report).
    """
    matrix, names, labels = io.read_features(features_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if holdout and model_path is not None:
        raise ValidationError("holdout retrains from scratch; drop the model path")
    if holdout:
        data = dataset_from_features(matrix, names, labels)
        state = np.random.SeedSequence([config.seed]).generate_state(2)
        folds = forest.stratified_kfold(data.labels, 5, int(state[0]))
        test_idx = folds[0]
        train_mask = np.ones(data.labels.size, dtype=bool)
        train_mask[test_idx] = False
        params = replace(config.forest_params, seed=int(state[1]))
        model = forest.fit_forest(
            forest.Dataset(
                data.features[train_mask],
                data.labels[train_mask],
                data.feature_names,
                data.class_names,
            ),
            params,
            jobs=jobs,
        )
        proba = forest.predict_proba(model, data.features[test_idx])
        report = _report_from_predictions(
            data.labels[test_idx], proba, forest.mdi_importance(model)
        )
    elif model_path is not None:
        model = forest.load_model(
            model_path, expected_fingerprint=_stored_fingerprint(features_path, config)
        )
        if tuple(names) != tuple(model.feature_names):
            raise ValidationError("feature columns do not match the saved model")
        unknown = sorted(set(labels) - set(model.class_names))
        if unknown:
            raise ValidationError(f"labels absent from the saved model: {unknown}")
        index = {name: i for i, name in enumerate(model.class_names)}
        y = np.array([index[label] for label in labels], dtype=np.int64)
        proba = forest.predict_proba(model, np.asarray(matrix, dtype=float))
        report = _report_from_predictions(y, proba, forest.mdi_importance(model))
    else:
        data = dataset_from_features(matrix, names, labels)
        report = forest.cross_validate(
            data, config.forest_params, k=config.cv_folds, seed=config.seed, jobs=jobs
        )
    report_path = out / "eval_report.json"
    io.atomic_write_json(report_path, report.to_dict())
    if not quiet:
        log.info("accuracy %.4f, kappa %.4f", report.accuracy, report.cohens_kappa)
    return report, report_path


@dataclass(frozen=True)
class ReportBundle:
    eval: forest.EvalReport
    accuracy_vs_k: tuple[tuple[int, float, float], ...]
    importance_chart_data: tuple[tuple[str, float], ...]


def run_report(
    features_path, config: ExperimentConfig, out_dir, jobs: int = 1, quiet: bool = False
) -> ReportBundle:
    """Sweep class-count subsets and rank features; write plot-ready CSVs.

    The k-subset sweep takes the first k class names in sorted order, so
    adding classes only extends the sweep instead of reshuffling it.
    """
    matrix, names, labels = io.read_features(features_path)
    matrix = np.asarray(matrix, dtype=float)
    class_names = sorted(set(labels))
    if len(class_names) < 2:
        raise ValidationError("reporting needs at least 2 classes")
    labels_arr = np.asarray(labels, dtype=object)
    rows: list[tuple[int, float, float]] = []
    full_report: forest.EvalReport | None = None
    for k in range(2, len(class_names) + 1):
        subset = class_names[:k]
        mask = np.isin(labels_arr, subset)
        sub_labels = [label for label, keep in zip(labels, mask) if keep]
        data = dataset_from_features(matrix[mask], names, sub_labels)
        report = forest.cross_validate(
            data, config.forest_params, k=config.cv_folds, seed=config.seed, jobs=jobs
        )
        baseline = forest.baseline_accuracy(data.labels)
        rows.append((k, float(report.accuracy), float(baseline)))
        full_report = report
        if not quiet:
            log.info("k=%d forest %.4f baseline %.4f", k, report.accuracy, baseline)
    ranked_idx = np.argsort(-full_report.importances, kind="stable")
    importance = tuple(
        (names[i], float(full_report.importances[i])) for i in ranked_idx
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    acc_lines = ["k,forest_accuracy,baseline_accuracy"]
    acc_lines += [f"{k},{repr(acc)},{repr(base)}" for k, acc, base in rows]
    io.atomic_write_text(out / "accuracy_vs_k.csv", "\n".join(acc_lines) + "\n")
    imp_lines = ["feature,importance"]
    imp_lines += [f"{name},{repr(value)}" for name, value in importance]
    io.atomic_write_text(out / "importance.csv", "\n".join(imp_lines) + "\n")
    io.atomic_write_json(out / "eval_report.json", full_report.to_dict())
    return ReportBundle(
        eval=full_report,
        accuracy_vs_k=tuple(rows),
        importance_chart_data=importance,
    )
