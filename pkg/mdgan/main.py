################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/main.py                                                                                      #
# Date de modification : 19.10.2026                                                                            #
# Description : Point d'entrée CLI : ingestion, données synthétiques, entraînement des deux étages,            #
# génération, évaluation, inspection.                                                                          #
################################################################################################################

import argparse
import logging
import os
import sys

from mdgan.checkpoint import load_checkpoint, save_checkpoint
from mdgan.config import build_config, load_config, parse_override
from mdgan.constants import DEFAULT_GRAM_TAPS, MANIFEST_NAME, RESOLUTIONS
from mdgan.data_pipeline import ClipStore, export_clip, export_frame_strip, ingest, read_frame, split_store
from mdgan.errors import ConfigError, IntegrityError, MdganError, TrainingDivergedError
from mdgan.evaluation import evaluate, write_report
from mdgan.logs import setup_logging
from mdgan.network_spec import build_discriminator, build_generator
from mdgan.pipeline import VideoPipeline
from mdgan.synth_data import MotionParams, synthesize
from mdgan.training import config_from_checkpoint, train_stage1, train_stage2

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 3


#--------------------------------------------------------------------------------------------------------------#
# Parseur dont les erreurs d'usage sortent avec le code 1 (2 est réservé aux erreurs de validation).           #
#--------------------------------------------------------------------------------------------------------------#
class CliParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog} : erreur : {message}\n")


#--------------------------------------------------------------------------------------------------------------#
# Construit l'arbre des sous-commandes et de leurs options.                                                    #
#--------------------------------------------------------------------------------------------------------------#
def build_parser() -> CliParser:
    parser = CliParser(prog="mdgan", description="Prédiction vidéo en deux étages (Base-Net puis Refine-Net).")
    parser.add_argument("-v", "--verbose", action="store_true", help="journalisation détaillée")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="découpe des dossiers de frames en clips de 32 frames")
    p.add_argument("--frames-root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=128)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("synth-data", help="génère un store de vidéos synthétiques")
    p.add_argument("--out", required=True)
    p.add_argument("--n-sources", type=int, default=4)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--velocity", type=float, default=1.5)
    p.add_argument("--radius", type=float, default=0.15)
    p.add_argument("--frame-size", type=int, default=64)
    p.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=64)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)

    for stage in (1, 2):
        p = sub.add_parser(f"train-stage{stage}", help=f"entraîne l'étage {stage}")
        p.add_argument("--config", help="fichier key = value")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--iterations", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--store")
        p.add_argument("--out", help="dossier du run")
        p.add_argument("--resume", help="checkpoint à reprendre")
        if stage == 2:
            p.add_argument("--g1", help="checkpoint d'étage 1")

    p = sub.add_parser("generate", help="prédit 32 frames à partir d'une image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stage", type=int, choices=(1, 2))
    p.add_argument("--strip", action="store_true", help="écrit aussi la planche des frames 1, 8, 16, 24, 32")

    p = sub.add_parser("evaluate", help="MSE, PSNR et SSIM sur le split de test")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="rapport CSV")
    p.add_argument("--stage", type=int, choices=(1, 2))

    p = sub.add_parser("inspect", help="décrit un checkpoint, un store ou une architecture")
    targets = p.add_subparsers(dest="target", required=True)
    t = targets.add_parser("checkpoint")
    t.add_argument("path")
    t = targets.add_parser("store")
    t.add_argument("path")
    t = targets.add_parser("spec")
    t.add_argument("--stage", type=int, choices=(1, 2), default=1)
    t.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=128)
    t.add_argument("--width", type=float, default=1.0)
    t.add_argument("--discriminator", action="store_true")
    t.add_argument("--taps", default=",".join(str(v) for v in DEFAULT_GRAM_TAPS))
    return parser


def cmd_ingest(args) -> int:
    records = ingest(args.frames_root, args.out, args.resolution, workers=args.workers)
    records = split_store(args.out, args.test_fraction, args.seed)
    n_test = sum(1 for r in records if r.split == "test")
    print(f"{len(records)} clip(s) : {len(records) - n_test} train, {n_test} test -> {args.out}")
    return EXIT_OK


def cmd_synth_data(args) -> int:
    motion = MotionParams(velocity=args.velocity, disk_radius=args.radius, frame_size=args.frame_size)
    records = synthesize(args.out, args.n_sources, args.frames, motion, seed=args.seed,
                         resolution=args.resolution, test_fraction=args.test_fraction)
    n_test = sum(1 for r in records if r.split == "test")
    print(f"{len(records)} clip(s) synthétique(s) : {len(records) - n_test} train, {n_test} test -> {args.out}")
    return EXIT_OK


#--------------------------------------------------------------------------------------------------------------#
# Configuration effective : défauts (ou celle du checkpoint repris) < --config < --set < options dédiées.      #
#--------------------------------------------------------------------------------------------------------------#
def _train_config(args, resume):
    overrides = dict(parse_override(item) for item in args.set)
    dedicated = {"iterations": args.iterations, "seed": args.seed, "store": args.store, "out": args.out,
                 "g1_checkpoint": getattr(args, "g1", None)}
    overrides.update({k: v for k, v in dedicated.items() if v is not None})
    if resume is not None and not args.config:
        return config_from_checkpoint(resume, overrides)
    return load_config(args.config, overrides)


#--------------------------------------------------------------------------------------------------------------#
# Entraîne un étage ; en cas de divergence, le dernier checkpoint sain est écrit avant de sortir.              #
#--------------------------------------------------------------------------------------------------------------#
def cmd_train(args, stage: int) -> int:
    resume = load_checkpoint(args.resume) if args.resume else None
    config = _train_config(args, resume)
    store = ClipStore(config.store)
    run_dir = config.out
    os.makedirs(run_dir, exist_ok=True)

    if stage == 1:
        checkpoints = train_stage1(store, config, run_dir, resume)
    else:
        g1 = None
        if resume is None:
            if not config.g1_checkpoint:
                raise ConfigError("train-stage2 demande --g1 (ou g1_checkpoint dans la configuration)")
            g1 = load_checkpoint(config.g1_checkpoint)
        checkpoints = train_stage2(store, g1, config, run_dir, resume)

    last = None
    try:
        for last in checkpoints:
            pass
    except TrainingDivergedError as exc:
        if exc.checkpoint is not None:
            path = os.path.join(run_dir, f"stage{stage}_last_good.mdck")
            save_checkpoint(exc.checkpoint, path)
            logger.error(f"Dernier checkpoint sain (itération {exc.checkpoint.iteration}) : {path}")
        raise
    if last is not None:
        print(f"Étage {stage} terminé à l'itération {last.iteration} : {os.path.join(run_dir, f'stage{stage}_final.mdck')}")
    return EXIT_OK


#--------------------------------------------------------------------------------------------------------------#
# Charge une frame, la duplique sur 32 pas de temps et exporte la prédiction de l'étage enregistré.            #
#--------------------------------------------------------------------------------------------------------------#
def cmd_generate(args) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    pipeline = VideoPipeline.from_checkpoint(checkpoint, args.stage)
    video = pipeline.predict_frame(read_frame(args.input))
    paths = export_clip(video, args.out)
    if args.strip:
        export_frame_strip(video, os.path.join(args.out, "strip.ppm"))
    print(f"{len(paths)} frame(s) écrite(s) dans {args.out} (étage {pipeline.stage})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    checkpoint = load_checkpoint(args.checkpoint)
    store = ClipStore(args.store)
    report = evaluate(checkpoint, store, args.n, args.seed, stage=args.stage,
                      checkpoint_id=os.path.basename(args.checkpoint))
    json_path = write_report(report, args.out, config=checkpoint.config)
    print(f"clips={report.clip_count} mse={report.mean_mse:.6g} psnr_db={report.mean_psnr:.4f} "
          f"ssim={report.mean_ssim:.4f} psnr_pooled_db={report.pooled_psnr:.4f}")
    print(f"Rapport : {args.out} (+ {json_path})")
    return EXIT_OK


#--------------------------------------------------------------------------------------------------------------#
# Rapport d'inspection en texte pour un checkpoint, un store ou une architecture.                              #
#--------------------------------------------------------------------------------------------------------------#
def inspect_report(args) -> str:
    if args.target == "checkpoint":
        checkpoint = load_checkpoint(args.path)
        counts = {}
        for name, arr in checkpoint.arrays.items():
            group = name.split(".", 1)[0]
            counts[group] = counts.get(group, 0) + int(arr.size)
        lines = [f"checkpoint {args.path}", f"version : {checkpoint.version}", f"étage : {checkpoint.stage}",
                 f"itération : {checkpoint.iteration}", f"tableaux : {len(checkpoint.arrays)}"]
        lines += [f"  {group} : {n} valeur(s)" for group, n in sorted(counts.items())]
        lines += ["configuration :", build_config(checkpoint.config).to_text().rstrip()]
        return "\n".join(lines)

    if args.target == "store":
        if not os.path.exists(os.path.join(args.path, MANIFEST_NAME)):
            raise IntegrityError(f"store illisible : {args.path}")
        store = ClipStore(args.path)
        counts = store.split_counts()
        lines = [f"store {args.path}", f"résolution : {store.resolution}", f"clips : {len(store.records)}"]
        for name in sorted(counts):
            lines.append(f"  {name} : {counts[name]} clip(s), {len(store.sources_for(name))} source(s)")
        problems = store.verify()
        lines.append("intégrité : ok" if not problems else "intégrité : " + " ; ".join(problems))
        return "\n".join(lines)

    spec = build_generator(args.stage, args.resolution, args.width)
    lines = [spec.summary_table(), f"paramètres : {spec.parameter_count()}"]
    if args.discriminator:
        taps = build_config({"gram_taps": args.taps}).gram_taps
        d_spec = build_discriminator(args.resolution, args.width, taps)
        lines += ["", d_spec.summary_table(), f"paramètres : {d_spec.parameter_count()}",
                  f"couches de features : {', '.join(d_spec.feature_taps)}"]
    return "\n".join(lines)


def cmd_inspect(args) -> int:
    print(inspect_report(args))
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "synth-data": cmd_synth_data,
    "train-stage1": lambda args: cmd_train(args, 1),
    "train-stage2": lambda args: cmd_train(args, 2),
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


#--------------------------------------------------------------------------------------------------------------#
# Exécute une sous-commande et traduit les exceptions en codes de sortie (0, 1, 2, 3).                         #
#--------------------------------------------------------------------------------------------------------------#
def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except MdganError as exc:
        logger.error(f"{type(exc).__name__} : {exc}")
        return exc.exit_code
    except OSError as exc:
        logger.error(f"Erreur d'entrée/sortie : {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
