from .flips import (FlipError, FlipLog, FlipRecord, FlipState, carve_channel, diagonal_flip, diagonal_flip_3d,
                    geometric_flip_admissible, random_flips, replay)
from .join import join
from .realize import RealizationResult, rerealize_local
from .refine import R0, R1, rebalance, refine, refine_3d
from .stiffen import StiffeningError, stiffen, stiffen_3d
