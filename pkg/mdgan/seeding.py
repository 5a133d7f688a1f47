################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/seeding.py                                                                                   #
# Date de modification : 19.10.2026                                                                            #
# Description : Générateur pseudo-aléatoire unique, découpé en flux nommés par sous-système.                   #
################################################################################################################

import numpy as np

# Ordre figé : ajouter un flux à la fin pour ne pas décaler les autres
STREAM_NAMES = ("init_g", "init_d", "init_g2", "data", "split", "synth", "eval")


#--------------------------------------------------------------------------------------------------------------#
# Flux aléatoires nommés dérivés d'une seule graine, avec capture/restauration d'état.                         #
#--------------------------------------------------------------------------------------------------------------#
class RngStreams:

    def __init__(self, seed: int):
        self.seed = int(seed)
        children = np.random.SeedSequence(self.seed).spawn(len(STREAM_NAMES))
        self._streams = {name: np.random.Generator(np.random.PCG64(child))
                         for name, child in zip(STREAM_NAMES, children)}

    #--------------------------------------------------------------------------------------------------------------#
    # Retourne le générateur d'un sous-système (KeyError si le nom est inconnu).                                   #
    #--------------------------------------------------------------------------------------------------------------#
    def stream(self, name: str) -> np.random.Generator:
        return self._streams[name]

    def state(self) -> dict:
        return {name: gen.bit_generator.state for name, gen in self._streams.items()}

    def restore(self, state: dict) -> None:
        for name, st in state.items():
            if name in self._streams:
                self._streams[name].bit_generator.state = st
