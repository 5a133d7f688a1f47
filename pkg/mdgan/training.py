################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/training.py                                                                                  #
# Date de modification : 19.10.2026                                                                            #
# Description : Boucles d'entraînement : étage 1 (G1/D1 alternés) et étage 2 (G2/D2 avec perte de classement,  #
# G1 figé).                                                                                                    #
################################################################################################################

import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from mdgan.checkpoint import Checkpoint, save_checkpoint
from mdgan.config import RunConfig, build_config
from mdgan.data_pipeline import ClipSampler, ClipStore
from mdgan.data_store import atomic_write_text
from mdgan.errors import ConfigError, NonFiniteError, TrainingDivergedError
from mdgan.losses import (LossReport, content_loss, discriminator_adversarial, discriminator_total,
                          generator_adversarial, generator_total, rank_loss_from_features, stage1_objective,
                          stage2_objective)
from mdgan.models import forward_discriminator, forward_generator
from mdgan.network_spec import NetworkSpec, build_discriminator, build_generator
from mdgan.nn_ops import ParameterSet, init_parameters
from mdgan.optim import AdamState, adam_step
from mdgan.pipeline import check_parameters
from mdgan.prefetch import BatchPrefetcher
from mdgan.progress import ProgressReporter
from mdgan.seeding import RngStreams
from mdgan.tensor import Tensor, no_grad

logger = logging.getLogger(__name__)

# Flux sauvegardés dans les checkpoints (le flux "data" voyage avec l'état du sampler)
_SAVED_STREAMS = ("init_g", "init_d", "init_g2", "split", "synth", "eval")


#--------------------------------------------------------------------------------------------------------------#
# Réseaux d'un étage : générateur entraîné, discriminateur, et G1 figé pour l'étage 2.                         #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class ModelBundle:
    g_spec: NetworkSpec
    g_params: ParameterSet
    d_spec: NetworkSpec
    d_params: ParameterSet
    g1_spec: Optional[NetworkSpec] = None
    g1_params: Optional[ParameterSet] = None


#--------------------------------------------------------------------------------------------------------------#
# Rend un seul jeu de paramètres différentiable le temps d'une phase ; les autres restent figés.               #
#--------------------------------------------------------------------------------------------------------------#
@contextmanager
def trainable(params: ParameterSet):
    params.set_requires_grad(True)
    try:
        yield params
    finally:
        params.set_requires_grad(False)


def _check_finite(value: Tensor, label: str) -> None:
    if not np.isfinite(value.item()):
        raise NonFiniteError(f"perte {label} non finie : {value.item()}")


# Étage 1

#--------------------------------------------------------------------------------------------------------------#
# Objectif minimisé par D1 : perte adverse sur Y réel et G1(X) (G1 sans gradient ni mise à jour de ses stats). #
#--------------------------------------------------------------------------------------------------------------#
def discriminator_objective_stage1(bundle: ModelBundle, Y: Tensor, X: Tensor, config: RunConfig) -> Tensor:
    with no_grad():
        fake = forward_generator(bundle.g_spec, bundle.g_params, X, track_running=False).video
    d_real, _ = forward_discriminator(bundle.d_spec, bundle.d_params, Y)
    d_fake, _ = forward_discriminator(bundle.d_spec, bundle.d_params, fake)
    return discriminator_adversarial(d_real, d_fake)


#--------------------------------------------------------------------------------------------------------------#
# Objectif minimisé par G1 : adverse + contenu ; renvoie (total, adverse, contenu).                            #
#--------------------------------------------------------------------------------------------------------------#
def generator_objective_stage1(bundle: ModelBundle, Y: Tensor, X: Tensor, config: RunConfig) -> tuple:
    fake = forward_generator(bundle.g_spec, bundle.g_params, X).video
    d_fake, _ = forward_discriminator(bundle.d_spec, bundle.d_params, fake, track_running=False)
    adv_g = generator_adversarial(d_fake, config.adv_form)
    content = content_loss(Y, fake, config.loss_reduction)
    return generator_total(adv_g, content), adv_g, content


# Étage 2

#--------------------------------------------------------------------------------------------------------------#
# Y₁ = G1(X) : G1 figé, BatchNorm en mode train sans mise à jour des statistiques glissantes.                  #
#--------------------------------------------------------------------------------------------------------------#
def base_output(bundle: ModelBundle, X: Tensor) -> Tensor:
    with no_grad():
        return forward_generator(bundle.g1_spec, bundle.g1_params, X, track_running=False).video


#--------------------------------------------------------------------------------------------------------------#
# Objectif minimisé par D2 : opposé de mean[log D(Y) + log(1 - D(G2(Y₁))) + λ·classement], soit adverse -      #
# λ·classement ; renvoie (objectif, adverse, classement).                                                      #
#--------------------------------------------------------------------------------------------------------------#
def discriminator_objective_stage2(bundle: ModelBundle, Y: Tensor, Y1: Tensor, config: RunConfig) -> tuple:
    with no_grad():
        Y2 = forward_generator(bundle.g_spec, bundle.g_params, Y1, track_running=False).video
    d_real, f_y = forward_discriminator(bundle.d_spec, bundle.d_params, Y)
    d_fake, f_y2 = forward_discriminator(bundle.d_spec, bundle.d_params, Y2)
    _, f_y1 = forward_discriminator(bundle.d_spec, bundle.d_params, Y1)
    adv_d = discriminator_adversarial(d_real, d_fake)
    rank = rank_loss_from_features(f_y1, f_y2, f_y, config.gram_batch_reduction)
    return discriminator_total(adv_d, rank, config.lambda_rank), adv_d, rank


#--------------------------------------------------------------------------------------------------------------#
# Objectif minimisé par G2 : adverse + λ·classement + contenu(Y, G2(Y₁)) ; renvoie (total, adverse,            #
# classement, contenu).                                                                                        #
#--------------------------------------------------------------------------------------------------------------#
def generator_objective_stage2(bundle: ModelBundle, Y: Tensor, Y1: Tensor, config: RunConfig) -> tuple:
    Y2 = forward_generator(bundle.g_spec, bundle.g_params, Y1).video
    d_fake, f_y2 = forward_discriminator(bundle.d_spec, bundle.d_params, Y2, track_running=False)
    with no_grad():
        _, f_y = forward_discriminator(bundle.d_spec, bundle.d_params, Y, track_running=False)
        _, f_y1 = forward_discriminator(bundle.d_spec, bundle.d_params, Y1, track_running=False)
    adv_g = generator_adversarial(d_fake, config.adv_form)
    rank = rank_loss_from_features(f_y1, f_y2, f_y, config.gram_batch_reduction)
    content = content_loss(Y, Y2, config.loss_reduction)
    return generator_total(adv_g, content, rank, config.lambda_rank), adv_g, rank, content


#--------------------------------------------------------------------------------------------------------------#
# Session d'entraînement : réseaux, optimiseurs, sampler préchargé, itération courante.                        #
#--------------------------------------------------------------------------------------------------------------#
class TrainingSession:

    def __init__(self, stage: int, config: RunConfig, bundle: ModelBundle, sampler: ClipSampler,
                 streams: RngStreams, opt_g: AdamState, opt_d: AdamState, iteration: int = 0):
        self.stage = stage
        self.config = config
        self.bundle = bundle
        self.sampler = sampler
        self.streams = streams
        self.opt_g = opt_g
        self.opt_d = opt_d
        self.iteration = iteration
        bundle.g_params.set_requires_grad(False)
        bundle.d_params.set_requires_grad(False)
        self.prefetcher = BatchPrefetcher(sampler, config.prefetch)

    #--------------------------------------------------------------------------------------------------------------#
    # Met à jour un réseau sur son objectif (gradients remis à zéro, contrôle de finitude, pas d'Adam).            #
    #--------------------------------------------------------------------------------------------------------------#
    def _update(self, params: ParameterSet, objective: Tensor, opt: AdamState, label: str) -> None:
        _check_finite(objective, label)
        params.zero_grad()
        objective.backward()
        adam_step(params, opt)

    #--------------------------------------------------------------------------------------------------------------#
    # Une itération : phase (a) mise à jour de D sur un lot, phase (b) nouveau lot et mise à jour de G.            #
    #--------------------------------------------------------------------------------------------------------------#
    def step(self) -> LossReport:
        b, cfg = self.bundle, self.config
        iteration = self.iteration + 1
        if self.stage == 1:
            Y, X = self.prefetcher.next()
            with trainable(b.d_params):
                obj_d = discriminator_objective_stage1(b, Y, X, cfg)
                self._update(b.d_params, obj_d, self.opt_d, "adv_d")
            Y, X = self.prefetcher.next()
            with trainable(b.g_params):
                total, adv_g, content = generator_objective_stage1(b, Y, X, cfg)
                self._update(b.g_params, total, self.opt_g, "total_g")
            report = stage1_objective(adv_g, content, obj_d, iteration)
        else:
            Y, X = self.prefetcher.next()
            Y1 = base_output(b, X)
            with trainable(b.d_params):
                obj_d, adv_d, _ = discriminator_objective_stage2(b, Y, Y1, cfg)
                self._update(b.d_params, obj_d, self.opt_d, "total_d")
            Y, X = self.prefetcher.next()
            Y1 = base_output(b, X)
            with trainable(b.g_params):
                total, adv_g, rank, content = generator_objective_stage2(b, Y, Y1, cfg)
                self._update(b.g_params, total, self.opt_g, "total_g")
            report = stage2_objective(adv_g, rank, content, adv_d, cfg.lambda_rank, iteration)
        self.iteration = iteration
        if not report.is_finite():
            raise NonFiniteError(f"bilan non fini à l'itération {iteration}")
        return report

    #--------------------------------------------------------------------------------------------------------------#
    # Instantané complet (copies) : paramètres, tampons, moments d'Adam, état du sampler et des flux.              #
    #--------------------------------------------------------------------------------------------------------------#
    def snapshot(self) -> Checkpoint:
        b = self.bundle
        arrays = {}
        arrays.update(b.g_params.to_arrays("g."))
        arrays.update(b.d_params.to_arrays("d."))
        if b.g1_params is not None:
            arrays.update(b.g1_params.to_arrays("g1."))
        arrays.update(self.opt_g.to_arrays("adam_g."))
        arrays.update(self.opt_d.to_arrays("adam_d."))
        rng_state = {name: st for name, st in self.streams.state().items() if name in _SAVED_STREAMS}
        extra = {"sampler": self.prefetcher.consumed_state, "adam_g": self.opt_g.scalars(),
                 "adam_d": self.opt_d.scalars()}
        return Checkpoint(self.stage, self.iteration, self.config.to_dict(), arrays, rng_state, extra)

    def close(self) -> None:
        self.prefetcher.close()


def _adam(config: RunConfig) -> AdamState:
    return AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps)


def _params_kw(config: RunConfig) -> dict:
    return {"bn_momentum": config.bn_momentum, "bn_eps": config.bn_eps}


#--------------------------------------------------------------------------------------------------------------#
# Construit une session neuve ou reprise ; toutes les vérifications de configuration se font ici.              #
#--------------------------------------------------------------------------------------------------------------#
def _build_session(stage: int, store: ClipStore, config: RunConfig, g1_checkpoint: Optional[Checkpoint],
                   resume: Optional[Checkpoint]) -> TrainingSession:
    if store.resolution != config.resolution:
        raise ConfigError(f"résolution du store {store.resolution} != résolution configurée {config.resolution}")
    if not store.records_for("train"):
        raise ConfigError(f"aucun clip d'entraînement dans {store.root}")
    if resume is not None and resume.stage != stage:
        raise ConfigError(f"reprise d'un checkpoint d'étage {resume.stage} en étage {stage}")

    dtype = config.np_dtype
    streams = RngStreams(config.seed)
    kw = _params_kw(config)
    g_spec = build_generator(stage, config.resolution, config.width_multiplier)
    d_spec = build_discriminator(config.resolution, config.width_multiplier, config.gram_taps)
    if stage == 2 and not d_spec.feature_taps:
        raise ConfigError("aucune couche de features configurée pour la perte de classement")

    g1_spec = g1_params = None
    if stage == 2:
        g1_spec = build_generator(1, config.resolution, config.width_multiplier)
        if resume is not None:
            g1_params = ParameterSet.from_arrays(resume.arrays, "g1.", requires_grad=False, **kw)
        else:
            if g1_checkpoint is None:
                raise ConfigError("checkpoint G1 manquant pour l'étage 2")
            prefix = "g1." if g1_checkpoint.stage == 2 else "g."
            g1_params = ParameterSet.from_arrays(g1_checkpoint.arrays, prefix, requires_grad=False, **kw)
        check_parameters(g1_spec, g1_params, "G1")
        g1_params = _cast(g1_params, dtype)

    sampler = ClipSampler(store, "train", config.batch_size, streams.stream("data"), dtype)
    if resume is not None:
        g_params = ParameterSet.from_arrays(resume.arrays, "g.", **kw)
        d_params = ParameterSet.from_arrays(resume.arrays, "d.", **kw)
        check_parameters(g_spec, g_params, "G du checkpoint de reprise")
        check_parameters(d_spec, d_params, "D du checkpoint de reprise")
        opt_g = AdamState.from_checkpoint(resume.arrays, "adam_g.", resume.extra["adam_g"])
        opt_d = AdamState.from_checkpoint(resume.arrays, "adam_d.", resume.extra["adam_d"])
        streams.restore(resume.rng_state)
        sampler.restore(resume.extra["sampler"])
        iteration = resume.iteration
    else:
        if stage == 2 and config.g2_init == "g1":
            g_params = g1_params.clone(requires_grad=True)
        else:
            g_params = init_parameters(g_spec, streams.stream("init_g2" if stage == 2 else "init_g"), dtype, **kw)
        d_params = init_parameters(d_spec, streams.stream("init_d"), dtype, **kw)
        opt_g, opt_d = _adam(config), _adam(config)
        iteration = 0

    bundle = ModelBundle(g_spec, g_params, d_spec, d_params, g1_spec, g1_params)
    return TrainingSession(stage, config, bundle, sampler, streams, opt_g, opt_d, iteration)


def _cast(params: ParameterSet, dtype: np.dtype) -> ParameterSet:
    for t in params.tensors.values():
        t.values = t.values.astype(dtype, copy=False)
    for name, buf in params.buffers.items():
        params.buffers[name] = buf.astype(dtype, copy=False)
    return params


def checkpoint_path(run_dir: str, stage: int, iteration: int) -> str:
    return os.path.join(run_dir, "checkpoints", f"stage{stage}_{iteration:06d}.mdck")


#--------------------------------------------------------------------------------------------------------------#
# Boucle commune : rapports, checkpoints périodiques + final ; une divergence remonte le dernier checkpoint    #
# sain.                                                                                                        #
#--------------------------------------------------------------------------------------------------------------#
def _run(session: TrainingSession, run_dir: Optional[str]) -> Iterator[Checkpoint]:
    cfg, stage = session.config, session.stage
    csv_path = os.path.join(run_dir, f"losses_stage{stage}.csv") if run_dir else None
    resume_from = session.iteration if session.iteration > 0 else None
    reporter = ProgressReporter(csv_path, cfg.progress_every, resume_from=resume_from)
    if run_dir:
        atomic_write_text(os.path.join(run_dir, "config.txt"), cfg.to_text())
    last_good = session.snapshot()
    try:
        while session.iteration < cfg.iterations:
            try:
                report = session.step()
            except NonFiniteError as exc:
                logger.error(f"Entraînement interrompu à l'itération {session.iteration + 1} : {exc}")
                raise TrainingDivergedError(str(exc), checkpoint=last_good) from exc
            reporter.report(report)
            if session.iteration % cfg.checkpoint_every == 0 or session.iteration == cfg.iterations:
                checkpoint = session.snapshot()
                if run_dir:
                    path = checkpoint_path(run_dir, stage, session.iteration)
                    save_checkpoint(checkpoint, path)
                    if session.iteration == cfg.iterations:
                        save_checkpoint(checkpoint, os.path.join(run_dir, f"stage{stage}_final.mdck"))
                    logger.info(f"Checkpoint écrit : {path}")
                last_good = checkpoint
                yield checkpoint
    finally:
        session.close()
        reporter.close()


#--------------------------------------------------------------------------------------------------------------#
# Entraîne G1/D1 ; renvoie un flux de checkpoints (vérifications faites avant le premier tour de boucle).      #
#--------------------------------------------------------------------------------------------------------------#
def train_stage1(store: ClipStore, config: RunConfig, run_dir: Optional[str] = None,
                 resume: Optional[Checkpoint] = None) -> Iterator[Checkpoint]:
    session = _build_session(1, store, config, None, resume)
    return _run(session, run_dir)


#--------------------------------------------------------------------------------------------------------------#
# Entraîne G2/D2 avec G1 figé (checkpoint d'étage 1, ou d'étage 2 dont on reprend le G1).                      #
#--------------------------------------------------------------------------------------------------------------#
def train_stage2(store: ClipStore, g1_checkpoint: Optional[Checkpoint], config: RunConfig,
                 run_dir: Optional[str] = None, resume: Optional[Checkpoint] = None) -> Iterator[Checkpoint]:
    session = _build_session(2, store, config, g1_checkpoint, resume)
    return _run(session, run_dir)


def config_from_checkpoint(checkpoint: Checkpoint, overrides: Optional[dict] = None) -> RunConfig:
    values = dict(checkpoint.config)
    values.update(overrides or {})
    return build_config(values)
