################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/evaluation.py                                                                                #
# Date de modification : 19.10.2026                                                                            #
# Description : Évaluation sur le split de test : MSE, PSNR et SSIM par clip, rapport CSV et résumé JSON.      #
################################################################################################################

import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from mdgan.checkpoint import Checkpoint
from mdgan.constants import CLIP_LENGTH
from mdgan.data_pipeline import ClipStore, normalize
from mdgan.data_store import atomic_write_json, atomic_write_text
from mdgan.errors import ConfigError, DataError
from mdgan.metrics import frame_psnr_mean, mse, psnr_from_mse, ssim, to_unit_range
from mdgan.models import duplicate_frame
from mdgan.pipeline import VideoPipeline
from mdgan.seeding import RngStreams
from mdgan.tensor import Tensor

logger = logging.getLogger(__name__)

CSV_HEADER = "clip_id,mse,psnr_db,ssim"


@dataclass
class MetricRow:
    clip_id: str
    mse: float
    psnr: float
    ssim: float
    frame_psnr: float


#--------------------------------------------------------------------------------------------------------------#
# Rapport d'évaluation : lignes par clip, moyennes et les deux agrégations de PSNR.                            #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class MetricReport:
    rows: list = field(default_factory=list)
    checkpoint_id: str = ""
    stage: int = 1

    @property
    def clip_count(self) -> int:
        return len(self.rows)

    def _mean(self, attr: str) -> float:
        return float(np.mean([getattr(r, attr) for r in self.rows])) if self.rows else float("nan")

    @property
    def mean_mse(self) -> float:
        return self._mean("mse")

    @property
    def mean_psnr(self) -> float:
        return self._mean("psnr")

    @property
    def mean_ssim(self) -> float:
        return self._mean("ssim")

    #--------------------------------------------------------------------------------------------------------------#
    # PSNR de la MSE moyenne (agrégation alternative à la moyenne des PSNR par clip).                              #
    #--------------------------------------------------------------------------------------------------------------#
    @property
    def pooled_psnr(self) -> float:
        return psnr_from_mse(self.mean_mse)

    @property
    def mean_frame_psnr(self) -> float:
        return self._mean("frame_psnr")

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.clip_id},{r.mse!r},{r.psnr!r},{r.ssim!r}")
        lines.append(f"MEAN,{self.mean_mse!r},{self.mean_psnr!r},{self.mean_ssim!r}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"checkpoint": self.checkpoint_id, "stage": self.stage, "clips": self.clip_count,
                "mean_mse": self.mean_mse, "mean_psnr_db": self.mean_psnr, "mean_ssim": self.mean_ssim,
                "pooled_psnr_db": self.pooled_psnr, "mean_frame_psnr_db": self.mean_frame_psnr}


#--------------------------------------------------------------------------------------------------------------#
# Évalue un prédicteur X -> vidéo sur n clips de test tirés avec la graine donnée.                             #
#--------------------------------------------------------------------------------------------------------------#
def evaluate_predictor(predict: Callable, store: ClipStore, n_samples: int, seed: int,
                       checkpoint_id: str = "", stage: int = 1, dtype=np.float32) -> MetricReport:
    records = store.records_for("test")
    if not records:
        raise DataError(f"split de test vide dans {store.root}")
    if n_samples < 1:
        raise ConfigError(f"nombre de clips à évaluer invalide : {n_samples}")
    rng = RngStreams(seed).stream("eval")
    chosen = rng.choice(len(records), size=min(n_samples, len(records)), replace=False)

    report = MetricReport(checkpoint_id=checkpoint_id, stage=stage)
    for idx in chosen:
        record = records[int(idx)]
        Y = normalize(store.load_pixels(record)[None], dtype)
        X = duplicate_frame(Tensor(Y[:, :, 0]), CLIP_LENGTH)
        out = predict(X)
        out = out.values if isinstance(out, Tensor) else np.asarray(out)
        a, b = to_unit_range(out[0]), to_unit_range(Y[0])
        m = mse(a, b)
        report.rows.append(MetricRow(record.clip_id, m, psnr_from_mse(m), ssim(a, b), frame_psnr_mean(a, b)))
        logger.debug(f"{record.clip_id} : mse={m:.6g}")
    return report


#--------------------------------------------------------------------------------------------------------------#
# Évalue un checkpoint (G1, ou G1 puis G2) ; la résolution du modèle doit être celle du store.                 #
#--------------------------------------------------------------------------------------------------------------#
def evaluate(checkpoint: Checkpoint, store: ClipStore, n_samples: int, seed: int,
             stage: Optional[int] = None, bn_inference: Optional[str] = None,
             checkpoint_id: str = "") -> MetricReport:
    pipeline = VideoPipeline.from_checkpoint(checkpoint, stage, bn_inference)
    if pipeline.resolution != store.resolution:
        raise ConfigError(f"résolution du modèle {pipeline.resolution} != résolution du store {store.resolution}")
    report = evaluate_predictor(pipeline.predict, store, n_samples, seed, checkpoint_id, pipeline.stage,
                                pipeline.dtype)
    logger.info(f"Évaluation : {report.clip_count} clip(s), MSE={report.mean_mse:.6g} "
                f"PSNR={report.mean_psnr:.4f} dB SSIM={report.mean_ssim:.4f}")
    return report


#--------------------------------------------------------------------------------------------------------------#
# Écrit le CSV et, à côté, le résumé JSON (agrégations de PSNR et écho de configuration).                      #
#--------------------------------------------------------------------------------------------------------------#
def write_report(report: MetricReport, csv_path: str, config: Optional[dict] = None) -> str:
    atomic_write_text(csv_path, report.to_csv())
    summary = report.summary()
    if config is not None:
        summary["config"] = config
    json_path = os.path.splitext(csv_path)[0] + ".json"
    atomic_write_json(json_path, summary)
    return json_path
