################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/logs.py                                                                                      #
# Date de modification : 19.10.2026                                                                            #
# Description : Configure la journalisation : une ligne horodatée [HH:MM:SS] par message, sur stderr.          #
################################################################################################################

import logging
import sys

LOG_FORMAT = "[%(asctime)s] %(message)s"
LOG_DATEFMT = "%H:%M:%S"


#--------------------------------------------------------------------------------------------------------------#
# Installe un handler unique sur le logger racine du paquet (idempotent).                                      #
#--------------------------------------------------------------------------------------------------------------#
def setup_logging(verbose: bool = False) -> logging.Logger:
    root = logging.getLogger("mdgan")
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(getattr(h, "_mdgan", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        handler._mdgan = True
        root.addHandler(handler)
    return root
