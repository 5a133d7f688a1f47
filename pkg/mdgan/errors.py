################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/errors.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Hiérarchie d'exceptions du projet, chacune portant le code de sortie CLI associé.              #
################################################################################################################

from typing import Optional


#--------------------------------------------------------------------------------------------------------------#
# Racine de toutes les erreurs du projet ; exit_code est repris tel quel par la CLI.                           #
#--------------------------------------------------------------------------------------------------------------#
class MdganError(Exception):
    exit_code = 2


class ConfigError(MdganError):
    pass


class DimensionError(MdganError):
    pass


class DomainError(MdganError):
    pass


class ContractError(MdganError):
    pass


class ValidationError(MdganError):
    pass


#--------------------------------------------------------------------------------------------------------------#
# Incohérence de topologie (jonction de skip) : signale un bug de spécification réseau.                        #
#--------------------------------------------------------------------------------------------------------------#
class InternalConsistencyError(MdganError):
    pass


class DataError(MdganError):
    pass


class NonFiniteError(MdganError):
    pass


#--------------------------------------------------------------------------------------------------------------#
# Divergence de l'entraînement : conserve le dernier checkpoint sain pour la reprise.                          #
#--------------------------------------------------------------------------------------------------------------#
class TrainingDivergedError(MdganError):

    def __init__(self, message: str, checkpoint: Optional[object] = None):
        super().__init__(message)
        self.checkpoint = checkpoint


class IntegrityError(MdganError):
    exit_code = 3


class UnsupportedVersionError(IntegrityError):
    pass
