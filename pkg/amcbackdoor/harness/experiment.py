"""
the experiment pipeline:

    generate -> train clean -> attribute -> trigger -> poison ->
    train backdoored -> evaluate -> baseline -> defend

every stage result is cached under ``<out>/cache``, keyed by a hash of the
configuration sections it depends on and the keys of the stages it uses.
"""

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from ..analysis.math import rms
from ..attribution import (ShapReport,
                           WindowingSpec,
                           build_background,
                           sampling_shap,
                           )
from ..configuration import Config
from ..datastore import (DatasetManifest,
                         LabeledDataset,
                         generate_dataset,
                         load_dataset,
                         manifest_path,
                         retransmit,
                         save_dataset,
                         )
from ..defense import (CleanseConfig,
                       activation_clustering,
                       reverse_engineer_anomaly,
                       strip,
                       )
from ..neuralnet import (ModelConfig,
                         Network,
                         TrainConfig,
                         load_model,
                         save_model,
                         train,
                         )
from ..poisoner import PoisonPlan, poison_dataset, triggered_test_set
from ..sigchain import ChannelConfig, OfdmConfig, PaConfig
from ..sigchain.channel import exponential_power_profile
from ..triggergen import TriggerSpec, design_trigger
from .array import generate_snr_grid
from .baseline import baseline_attack
from .metrics import CSV_COLUMNS, MetricRow, write_metrics
from .sweep import snr_sweep

log = logging.getLogger(__name__)

# random stream tags under the master seed
SURROGATE_SEED = 1000
ATTRIBUTION_TAG = 11
POISON_TAG = 12
BASELINE_TAG = 13
DEFENSE_TAG = 14
DEFENSE_STREAM = 5

STAGES = ('generate', 'train', 'attribute', 'trigger', 'poison',
          'evaluate', 'defend', 'run')


class StageError(ValueError):
    """ a pipeline stage failed; ``stage`` names it """

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f'stage {stage} failed: {cause}')
        self.stage = stage
        self.cause = cause


def manifest_from_config(config: Config, seed: int) -> DatasetManifest:
    ch = config['channel']
    powers = ch['tap_powers']
    if powers is None:
        powers = exponential_power_profile(ch['tap_delays'], ch['tap_decay'])
    ds = config['dataset']
    n_train = int(round(ds['n_examples']*ds['train_fraction']))
    return DatasetManifest(
        ofdm=OfdmConfig(**config['ofdm']),
        channel=ChannelConfig(tuple(ch['tap_delays']), tuple(powers),
                              ch['snr_db']),
        pa=PaConfig(**config['pa']),
        class_names=tuple(ds['classes']),
        n_train=n_train,
        n_test=ds['n_examples'] - n_train,
        master_seed=seed,
        train_snr_db=tuple(ds['train_snr_db']))


def model_config(config: Config, arch: str, manifest: DatasetManifest,
                 input_scale: float, seed: int) -> ModelConfig:
    models = config['models']
    sizes = {'MLP': models['mlp_hidden'],
             'CNN': models['cnn_filters'],
             'GRU': [models['gru_hidden']]}[arch]
    return ModelConfig(arch=arch,
                       n_classes=manifest.n_classes,
                       input_shape=manifest.ofdm.rx_shape,
                       layer_sizes=tuple(sizes),
                       kernel_size=models['cnn_kernel'],
                       pool_size=models['cnn_pool'],
                       dense_size=models['cnn_dense'],
                       activation=models['activation'],
                       input_scale=input_scale,
                       seed=seed,
                       front_end=models['front_end'])


def train_config(config: Config, seed: int) -> TrainConfig:
    t = config['training']
    return TrainConfig(t['epochs'], t['batch_size'], t['learning_rate'],
                       t['optimizer'], seed, t['weight_decay'],
                       t['validation_fraction'], t['patience'])


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + '\n'


def _replace(tmp: Path, path: Path):
    os.replace(tmp, path)
    if manifest_path(tmp).exists():
        os.replace(manifest_path(tmp), manifest_path(path))


class Experiment:
    """
    Args:
        ``config``: validated configuration.
        ``out_dir``: reports are written here, stage results under
            ``out_dir/cache``.
    """

    def __init__(self, config: Config, out_dir: Union[str, Path]):
        self.config = config
        self.out_dir = Path(out_dir)
        self.cache_dir = self.out_dir/'cache'
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.seed = config['experiment.seed']
        self.show_progress = config['core.show_progress_bars']
        self.batch_size = config['core.eval_batch_size']
        self.y_tar = config['attack.y_tar']
        self.archs = config['models.archs']
        self.cache_hits: List[str] = []
        self.keys: Dict[str, str] = {}
        self._memo: Dict[str, Any] = {}

    # -- plumbing --------------------------------------------------------

    def rng(self, tag: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, tag])

    def key(self, stage: str, sections=(), upstream=()) -> str:
        content = {'stage': stage,
                   'config': self.config.fingerprint(*sections),
                   'seed': self.seed,
                   'upstream': list(upstream)}
        text = json.dumps(content, sort_keys=True)
        key = hashlib.sha256(text.encode()).hexdigest()[:16]
        self.keys[stage] = key
        return key

    @contextmanager
    def stage(self, name: str):
        try:
            yield
        except StageError:
            raise
        except Exception as err:
            log.error(f'stage {name} failed: {err}')
            raise StageError(name, err) from err

    def cached(self, name: str, key: str, suffix: str,
               build: Callable[[], Any], save: Callable[[Any, Path], Any],
               load: Callable[[Path], Any]):
        """ load ``name`` from the cache or build and store it atomically """
        memo = f'{name}-{key}'
        if memo in self._memo:
            return self._memo[memo]
        path = self.cache_dir/f'{name}-{key}{suffix}'
        if path.exists():
            log.info(f'{name}: cache hit ({path.name})')
            self.cache_hits.append(name)
            value = load(path)
        else:
            value = build()
            tmp = path.with_name(path.name + '.tmp')
            save(value, tmp)
            _replace(tmp, path)
        self._memo[memo] = value
        return value

    def _write_text(self, obj, path: Path):
        path.write_text(_dumps(obj))

    def _read_json(self, path: Path):
        return json.loads(path.read_text())

    def report(self, name: str, text: str) -> Path:
        path = self.out_dir/name
        tmp = path.with_name(path.name + '.tmp')
        tmp.write_text(text)
        os.replace(tmp, path)
        return path

    # -- stages ----------------------------------------------------------

    def generate(self) -> LabeledDataset:
        with self.stage('generate'):
            key = self.key('generate', ('ofdm', 'pa', 'channel', 'dataset'))
            manifest = manifest_from_config(self.config, self.seed)
            return self.cached(
                'dataset', key, '.amcb',
                lambda: generate_dataset(manifest, self.show_progress),
                save_dataset, load_dataset)

    def input_scale(self) -> float:
        x, _ = self.generate().train_view()
        level = rms(x.astype(float))
        return float(1/level) if level > 0 else 1.

    def _train(self, name: str, arch: str, dataset: LabeledDataset,
               key: str, seed: int) -> Network:
        def build():
            cfg = model_config(self.config, arch, dataset.manifest,
                               self.input_scale(), seed)
            model = Network(cfg, self.batch_size)
            trained = train(model, dataset, train_config(self.config, seed),
                            self.show_progress)
            return trained.network

        def load(path):
            model = load_model(path)
            model.batch_size = self.batch_size
            return model
        return self.cached(name, key, '.amcm', build, save_model, load)

    def train_clean(self) -> Dict[str, Network]:
        dataset = self.generate()
        with self.stage('train'):
            models = {}
            for arch in self.archs:
                key = self.key(f'clean_{arch}', ('models', 'training'),
                               [self.keys['generate']])
                models[arch] = self._train(f'clean_{arch}', arch, dataset,
                                           key, self.seed)
            return models

    def surrogate(self) -> Network:
        dataset = self.generate()
        arch = self.config['attack.surrogate']
        key = self.key('surrogate',
                       ('models', 'training', 'attack.surrogate'),
                       [self.keys['generate']])
        return self._train('surrogate', arch, dataset, key,
                           self.seed + SURROGATE_SEED)

    def windowing(self) -> WindowingSpec:
        return WindowingSpec(self.config['attack.window_len'],
                             self.generate().manifest.ofdm.symbol_len)

    def _attribute(self) -> ShapReport:
        dataset = self.generate()
        model = self.surrogate()
        attack = self.config['attack']
        spec = self.windowing()
        rng = self.rng(ATTRIBUTION_TAG)
        bg = build_background(dataset, self.y_tar, attack['background_size'],
                              attack['background_mix'], rng, spec)
        train_idx = dataset.train_indices
        symbols, labels = [], []
        m = dataset.manifest.ofdm.symbols_per_frame
        for c in range(dataset.manifest.n_classes):
            frames = train_idx[dataset.labels[train_idx] == c]
            count = min(attack['symbols_per_class'], len(frames))
            picks = rng.choice(frames, count, replace=False)
            rows = rng.integers(m, size=count)
            symbols.append(dataset.clean_tx[picks, rows].astype(complex))
            labels.append(np.full(count, c))
        return sampling_shap(model, np.concatenate(symbols),
                             np.concatenate(labels), self.y_tar, spec, bg,
                             attack['permutations'], rng,
                             cp_len=dataset.manifest.ofdm.cp_len,
                             n_classes=dataset.manifest.n_classes,
                             k=attack['top_k'],
                             selection=attack['selection'],
                             show_progress=self.show_progress)

    def attribute(self) -> ShapReport:
        self.generate()
        with self.stage('attribute'):
            self.surrogate()
            key = self.key('attribute', ('attack',),
                           [self.keys['generate'], self.keys['surrogate']])
            report = self.cached(
                'shap', key, '.json', self._attribute,
                lambda r, p: self._write_text(r.to_dict(), p),
                lambda p: ShapReport.from_dict(self._read_json(p)))
            self.report('shap_report.json', _dumps(report.to_dict()))
            return report

    def trigger(self) -> TriggerSpec:
        report = self.attribute()
        dataset = self.generate()
        with self.stage('trigger'):
            key = self.key('trigger', ('attack',), [self.keys['attribute']])

            def build():
                trigger, stats = design_trigger(
                    dataset, self.y_tar, report.selected_windows,
                    self.windowing(), self.config['attack.lambda_mix'],
                    self.config['attack.kappa_db'])
                trigger.extra = {
                    'n_windows_used': stats.n_windows_used,
                    'explained_variance_ratio':
                        stats.explained_variance_ratio,
                    'window_rms': stats.window_rms}
                return trigger
            trigger = self.cached(
                'trigger', key, '.json', build,
                lambda t, p: self._write_text(t.to_dict(), p),
                lambda p: TriggerSpec.from_dict(self._read_json(p)))
            self.report('trigger.json', _dumps(trigger.to_dict()))
            return trigger

    def plan(self, trigger: TriggerSpec) -> PoisonPlan:
        return PoisonPlan(self.y_tar, trigger, self.config['attack.rho_h'],
                          self.config['attack.example_fraction'],
                          self.generate().manifest.ofdm.n_subcarriers)

    def poison(self) -> LabeledDataset:
        trigger = self.trigger()
        dataset = self.generate()
        with self.stage('poison'):
            key = self.key('poison', ('attack',), [self.keys['trigger']])
            return self.cached(
                'poisoned', key, '.amcb',
                lambda: poison_dataset(dataset, self.plan(trigger),
                                       self.rng(POISON_TAG),
                                       self.show_progress).dataset,
                save_dataset, load_dataset)

    def train_backdoored(self, tag: str = 'poison',
                         poisoned: Optional[LabeledDataset] = None
                         ) -> Dict[str, Network]:
        poisoned = poisoned if poisoned is not None else self.poison()
        upstream = self.keys[tag]
        with self.stage('train'):
            models = {}
            for arch in self.archs:
                name = f'{tag}_backdoored_{arch}'
                key = self.key(name, ('models', 'training'),
                               [upstream, self.keys['generate']])
                models[arch] = self._train(name, arch, poisoned, key,
                                           self.seed)
            return models

    def snr_grid(self) -> List[float]:
        """ the listed SNRs, or a grid spanning them when a step is set """
        grid = self.config['evaluation.snr_grid']
        step = self.config['evaluation.snr_step']
        if step is None:
            return [float(s) for s in grid]
        return generate_snr_grid(min(grid), max(grid), step=step).tolist()

    def _sweep_csv(self, name: str, trigger: TriggerSpec,
                   backdoored: Dict[str, Network], upstream: str) -> str:
        clean = self.train_clean()
        dataset = self.generate()
        key = self.key(name, ('evaluation', 'attack', 'models', 'training'),
                       [upstream, self.keys['generate']])

        def build():
            rows = snr_sweep(dataset, clean, backdoored, trigger, self.y_tar,
                             self.snr_grid(), self.seed,
                             self.config['attack.rho_h'], self.show_progress)
            tmp = self.cache_dir/f'{name}.csv.build'
            write_metrics(rows, tmp)
            text = tmp.read_text()
            tmp.unlink()
            return text
        return self.cached(name, key, '.csv', build,
                           lambda t, p: p.write_text(t),
                           lambda p: p.read_text())

    def evaluate(self) -> Path:
        trigger = self.trigger()
        backdoored = self.train_backdoored()
        with self.stage('evaluate'):
            text = self._sweep_csv('metrics', trigger, backdoored,
                                   self.keys['poison'])
            return self.report('metrics.csv', text)

    def baseline(self) -> Optional[Path]:
        if not self.config['baseline.enabled']:
            return None
        trigger = self.trigger()
        dataset = self.generate()
        with self.stage('baseline'):
            key = self.key('baseline', ('attack',), [self.keys['trigger']])

            def build():
                return baseline_attack(
                    dataset, self.y_tar, trigger.alpha,
                    self.rng(BASELINE_TAG), trigger.window_len,
                    self.config['attack.example_fraction'],
                    self.config['attack.rho_h'], self.show_progress).dataset
            poisoned = self.cached('baseline_poisoned', key, '.amcb', build,
                                   save_dataset, load_dataset)
            baseline_trigger = TriggerSpec.from_dict(
                poisoned.manifest.poison_metadata['trigger'])
        backdoored = self.train_backdoored('baseline', poisoned)
        with self.stage('baseline'):
            text = self._sweep_csv('baseline_metrics', baseline_trigger,
                                   backdoored, self.keys['baseline'])
            return self.report('baseline_metrics.csv', text)

    def _defend(self, arch: str, model: Network,
                poisoned: LabeledDataset, trigger: TriggerSpec) -> dict:
        dataset = self.generate()
        d = self.config['defense']
        snr = dataset.manifest.channel.snr_db
        rng = self.rng(DEFENSE_TAG)

        test = dataset.test_indices
        clean_idx = test[dataset.labels[test] != self.y_tar][
            :d['strip_inputs']]
        clean_x = retransmit(dataset, clean_idx, DEFENSE_STREAM, snr)
        trig_x, _ = triggered_test_set(dataset, trigger, self.y_tar, snr,
                                       DEFENSE_STREAM,
                                       self.config['attack.rho_h'], rng)
        trig_x = trig_x[:d['strip_inputs']]
        overlay_pool, _ = dataset.train_view()
        strip_result = strip(model, clean_x, trig_x, overlay_pool,
                             d['strip_overlays'], rng, d['strip_fpr'])

        train_idx = poisoned.train_indices
        x, labels = poisoned.train_view()
        marked = np.flatnonzero(np.isin(
            train_idx, poisoned.manifest.poison_metadata['poisoned_indices']))
        clusters = activation_clustering(model, x, labels, marked,
                                         d['clustering_components'],
                                         d['clustering_threshold'],
                                         self.seed)

        cleanse = CleanseConfig(d['cleanse_steps'], d['cleanse_samples'],
                                d['cleanse_learning_rate'],
                                d['cleanse_beta'], d['cleanse_target_asr'])
        anomaly = reverse_engineer_anomaly(model, clean_x, cleanse, rng,
                                           self.show_progress)
        return {'arch': arch,
                'y_tar': self.y_tar,
                'snr_db': snr,
                'strip': strip_result.to_dict(),
                'activation_clustering': clusters.to_dict(),
                'neural_cleanse': anomaly.to_dict(),
                'target_anomaly_index':
                    float(anomaly.anomaly_indices[self.y_tar])}

    def defend(self) -> List[Path]:
        if not self.config['defense.enabled']:
            return []
        trigger = self.trigger()
        poisoned = self.poison()
        backdoored = self.train_backdoored()
        paths = []
        with self.stage('defend'):
            for arch, model in backdoored.items():
                key = self.key(f'defend_{arch}', ('defense', 'attack'),
                               [self.keys[f'poison_backdoored_{arch}']])
                result = self.cached(
                    f'defense_{arch}', key, '.json',
                    lambda: self._defend(arch, model, poisoned, trigger),
                    self._write_text, self._read_json)
                paths.append(self.report(f'defense_{arch}.json',
                                         _dumps(result)))
        return paths

    def metadata(self) -> Path:
        trigger = self.trigger()
        poisoned = self.poison()
        meta = poisoned.manifest.poison_metadata
        return self.report('run_metadata.json', _dumps({
            'seed': self.seed,
            'y_tar': self.y_tar,
            'target_class': poisoned.manifest.class_names[self.y_tar],
            'window_indices': list(trigger.window_indices),
            'window_len': trigger.window_len,
            'alpha': trigger.alpha,
            'rho_h': meta['rho_h'],
            'rho_v': meta['rho_v'],
            'n_poisoned': len(meta['poisoned_indices']),
            'config_fingerprint': self.config.fingerprint(
                *self.config.current_config),
            'cache_keys': dict(sorted(self.keys.items())),
            'csv_columns': CSV_COLUMNS,
        }))

    def run(self) -> List[Path]:
        """ every stage, returning the report files """
        metrics = self.evaluate()
        paths = [self.out_dir/'shap_report.json',
                 self.out_dir/'trigger.json',
                 metrics]
        baseline = self.baseline()
        if baseline is not None:
            paths.append(baseline)
        paths += self.defend()
        paths.append(self.metadata())
        log.info(f'experiment finished, reports in {self.out_dir}')
        return paths


def run_experiment(config_path: Optional[Union[str, Path]],
                   out_dir: Union[str, Path] = 'results',
                   seed: Optional[int] = None) -> List[Path]:
    config = Config(config_path)
    if seed is not None:
        config.update({'experiment.seed': seed})
    return Experiment(config, out_dir).run()
