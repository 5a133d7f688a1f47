################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/prefetch.py                                                                                  #
# Date de modification : 19.10.2026                                                                            #
# Description : Préchargement des lots sur un thread dédié via une queue bornée (handoff worker -> boucle      #
# d'entraînement).                                                                                             #
################################################################################################################

import logging
import queue
import threading

logger = logging.getLogger(__name__)


class _WorkerFailure:
    __slots__ = ("exc",)

    def __init__(self, exc: BaseException):
        self.exc = exc


#--------------------------------------------------------------------------------------------------------------#
# Prépare les lots d'un ClipSampler à l'avance ; chaque lot voyage avec l'état du sampler après son tirage.    #
#--------------------------------------------------------------------------------------------------------------#
class BatchPrefetcher:

    #--------------------------------------------------------------------------------------------------------------#
    # Démarre le thread de préchargement (depth = 0 : tirage synchrone dans le thread appelant).                   #
    #--------------------------------------------------------------------------------------------------------------#
    def __init__(self, sampler, depth: int = 2):
        self.sampler = sampler
        self.depth = max(0, int(depth))
        # État correspondant aux lots déjà consommés (sert aux checkpoints)
        self.consumed_state = sampler.state()
        self._stop = threading.Event()
        self._queue = queue.Queue(maxsize=self.depth) if self.depth else None
        self._thread = None
        if self._queue is not None:
            self._thread = threading.Thread(target=self._worker, name="mdgan-prefetch", daemon=True)
            self._thread.start()

    def _put(self, item) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    #--------------------------------------------------------------------------------------------------------------#
    # Boucle du worker : tire les lots tant qu'on ne lui demande pas de s'arrêter ; une erreur est relayée.        #
    #--------------------------------------------------------------------------------------------------------------#
    def _worker(self) -> None:
        try:
            while not self._stop.is_set():
                batch = self.sampler.next_batch()
                if not self._put((batch, self.sampler.state())):
                    return
        except Exception as exc:
            logger.error(f"Échec du préchargement : {exc}")
            self._put(_WorkerFailure(exc))

    def next(self) -> tuple:
        if self._queue is None:
            batch = self.sampler.next_batch()
            self.consumed_state = self.sampler.state()
            return batch
        item = self._queue.get()
        if isinstance(item, _WorkerFailure):
            raise item.exc
        batch, state = item
        self.consumed_state = state
        return batch

    def close(self) -> None:
        self._stop.set()
        if self._thread is not None:
            while True:
                try:
                    self._queue.get_nowait()
                except queue.Empty:
                    break
            self._thread.join(timeout=5.0)
            self._thread = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
