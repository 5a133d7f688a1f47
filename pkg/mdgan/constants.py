################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/constants.py                                                                                 #
# Date de modification : 19.10.2026                                                                            #
# Description : Centralise les hyperparamètres par défaut, l'architecture de référence et les formats          #
# binaires.                                                                                                    #
################################################################################################################

# Vidéo
CLIP_LENGTH = 32
RESOLUTIONS = (128, 64)
CHANNELS = 3

# Architecture des générateurs (nom, filtres, noyau, stride, padding)
# deconv1 : noyau temporel 2 (et non 4) pour retomber sur la forme de conv5
ENCODER_LAYERS = (
    ("conv1", 32, (3, 4, 4), (1, 2, 2), (1, 1, 1)),
    ("conv2", 64, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("conv3", 128, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("conv4", 256, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("conv5", 512, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("conv6", 512, (2, 4, 4), (1, 1, 1), (0, 0, 0)),
)
DECODER_LAYERS = (
    ("deconv1", 512, (2, 4, 4), (1, 1, 1), (0, 0, 0)),
    ("deconv2", 256, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("deconv3", 128, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("deconv4", 64, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("deconv5", 32, (4, 4, 4), (2, 2, 2), (1, 1, 1)),
    ("deconv6", 3, (3, 4, 4), (1, 2, 2), (1, 1, 1)),
)

# Couche de score du discriminateur (un seul noeud + sigmoid)
SCORE_LAYER = ("score", 1, (2, 4, 4), (1, 1, 1), (0, 0, 0))

# Paires de skip (encodeur -> entrée du deconv nommé) par étage
STAGE1_SKIPS = (("conv1", "deconv6"), ("conv2", "deconv5"), ("conv3", "deconv4"),
                ("conv4", "deconv3"), ("conv5", "deconv2"))
STAGE2_REMOVED_SKIPS = (("conv1", "deconv6"), ("conv2", "deconv5"))

# Noyaux
LEAKY_RELU_SLOPE = 0.2
INIT_STD = 0.02
BN_EPS = 1e-5
BN_MOMENTUM = 0.1

# Pertes
SCORE_CLAMP_EPS = 1e-7
LAMBDA_RANK = 1.0
DEFAULT_GRAM_TAPS = (1, 3)

# Optimiseur (β=0.5 lu comme β1, « momentum 0.9 » comme β2)
LEARNING_RATE = 2e-4
ADAM_BETA1 = 0.5
ADAM_BETA2 = 0.9
ADAM_EPS = 1e-8

# Entraînement
DEFAULT_BATCH_SIZE = 2
CHECKPOINT_EVERY = 500

# Métriques
PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Formats binaires
TENSOR_MAGIC = b"MDT1"
CHECKPOINT_MAGIC = b"MDCK"
CHECKPOINT_VERSION = 1
DTYPE_CODES = {"float32": 0, "float64": 1, "uint8": 2}

# Stockage des clips
MANIFEST_NAME = "manifest.jsonl"
STORE_INFO_NAME = "store.json"
CLIPS_DIR = "clips"
FRAME_EXTENSIONS = (".ppm", ".png")

# Exemples visuels (frames 1, 8, 16, 24, 32)
STRIP_FRAMES = (0, 7, 15, 23, 31)
