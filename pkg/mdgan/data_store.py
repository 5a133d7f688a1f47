################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/data_store.py                                                                                #
# Date de modification : 19.10.2026                                                                            #
# Description : Persistance locale : écritures atomiques (octets, texte, JSON, JSON-lines) et relecture sûre.  #
################################################################################################################

import os
import json
import tempfile
from datetime import datetime

from mdgan.errors import IntegrityError


#--------------------------------------------------------------------------------------------------------------#
# Répertoire racine des runs par défaut (surchargé par MDGAN_RUNS_DIR).                                        #
#--------------------------------------------------------------------------------------------------------------#
def default_runs_dir() -> str:
    env_override = os.getenv("MDGAN_RUNS_DIR")
    if env_override:
        return env_override
    return "runs"


#--------------------------------------------------------------------------------------------------------------#
# Crée le dossier parent d'un chemin si nécessaire.                                                            #
#--------------------------------------------------------------------------------------------------------------#
def ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if parent and not os.path.exists(parent):
        os.makedirs(parent, exist_ok=True)


#--------------------------------------------------------------------------------------------------------------#
# Écrit des octets de façon atomique (fichier temporaire + fsync + os.replace).                                #
#--------------------------------------------------------------------------------------------------------------#
def atomic_write_bytes(path: str, data: bytes) -> None:
    ensure_parent_dir(path)
    dirpath = os.path.dirname(os.path.abspath(path))
    prefix = os.path.basename(path) + "."
    fd, tmp = tempfile.mkstemp(dir=dirpath, prefix=prefix, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except Exception:
        try:
            if os.path.exists(tmp):
                os.remove(tmp)
        finally:
            raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


#--------------------------------------------------------------------------------------------------------------#
# Écrit un JSON trié et indenté de façon atomique.                                                             #
#--------------------------------------------------------------------------------------------------------------#
def atomic_write_json(path: str, data) -> None:
    text = json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True)
    atomic_write_text(path, text + "\n")


#--------------------------------------------------------------------------------------------------------------#
# Charge un JSON ; en cas de fichier illisible, garde une copie « .corrupt » et renvoie le défaut.             #
#--------------------------------------------------------------------------------------------------------------#
def safe_load_json(path: str, default):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        return default
    except json.JSONDecodeError:
        # JSON corrompu : copie horodatée, puis valeur par défaut
        try:
            ts = datetime.now().strftime("%Y%m%d-%H%M%S")
            corrupt = f"{path}.corrupt-{ts}"
            with open(path, "r", encoding="utf-8", errors="replace") as f:
                bad = f.read()
            with open(corrupt, "w", encoding="utf-8") as f:
                f.write(bad)
        except Exception:
            pass
        return default


#--------------------------------------------------------------------------------------------------------------#
# Écrit un manifeste JSON-lines (un enregistrement par ligne, clés triées) de façon atomique.                  #
#--------------------------------------------------------------------------------------------------------------#
def write_jsonl(path: str, records: list[dict]) -> None:
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


#--------------------------------------------------------------------------------------------------------------#
# Relit un manifeste JSON-lines ; une ligne illisible est une erreur d'intégrité.                              #
#--------------------------------------------------------------------------------------------------------------#
def read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IntegrityError(f"{path}:{lineno} : ligne de manifeste illisible ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise IntegrityError(f"{path}:{lineno} : enregistrement attendu, reçu {type(record).__name__}")
            records.append(record)
    return records
