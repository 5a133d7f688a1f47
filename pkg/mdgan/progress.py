################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/progress.py                                                                                  #
# Date de modification : 19.10.2026                                                                            #
# Description : Suivi d'entraînement : CSV des pertes par itération et lignes de progression sur stdout        #
# (cadencées).                                                                                                 #
################################################################################################################

import os
import sys
from typing import Optional, TextIO

from mdgan.data_store import ensure_parent_dir
from mdgan.losses import CSV_HEADER, LossReport


#--------------------------------------------------------------------------------------------------------------#
# Écrit chaque LossReport dans le CSV et n'affiche qu'une ligne de progression toutes les `every` itérations.  #
#--------------------------------------------------------------------------------------------------------------#
class ProgressReporter:

    #--------------------------------------------------------------------------------------------------------------#
    # Ouvre le CSV ; à la reprise, les lignes postérieures au checkpoint sont écartées.                            #
    #--------------------------------------------------------------------------------------------------------------#
    def __init__(self, csv_path: Optional[str] = None, every: int = 1, stream: Optional[TextIO] = None,
                 resume_from: Optional[int] = None):
        self.every = max(1, int(every))
        self.stream = stream if stream is not None else sys.stdout
        self.last_report: Optional[LossReport] = None
        self._file = None
        if csv_path:
            ensure_parent_dir(csv_path)
            kept = _rows_up_to(csv_path, resume_from) if resume_from is not None else []
            self._file = open(csv_path, "w", encoding="utf-8", newline="\n")
            self._file.write(CSV_HEADER + "\n")
            for row in kept:
                self._file.write(row + "\n")
            self._file.flush()

    def report(self, report: LossReport) -> None:
        if self._file is not None:
            self._file.write(report.csv_row() + "\n")
            self._file.flush()
        if report.iteration % self.every == 0:
            self.stream.write(report.progress_line() + "\n")
            self.stream.flush()
        self.last_report = report

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def _rows_up_to(csv_path: str, iteration: int) -> list[str]:
    if not os.path.exists(csv_path):
        return []
    kept = []
    with open(csv_path, "r", encoding="utf-8") as f:
        for line in f.read().splitlines()[1:]:
            head = line.split(",", 1)[0]
            if head.isdigit() and int(head) <= iteration:
                kept.append(line)
    return kept
