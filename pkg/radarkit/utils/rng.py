"""Geradores contadores (Philox) chaveados por (seed, stream, contadores).

O mesmo chaveamento produz os mesmos números independentemente de quantas
threads executam o trabalho ou em que ordem.
"""
import numpy as np

# Identificadores fixos de stream; nunca reutilizar um valor para outro fim
STREAM_INITIAL_STATE = 1
STREAM_PROCESS_NOISE = 2
STREAM_OBSERVATION_NOISE = 3
STREAM_ACTION_NOISE = 4
STREAM_PARTICLE_OBS = 10
STREAM_PARTICLE_RESAMPLE = 11
STREAM_ENSEMBLE = 20
STREAM_OUR_NOISE = 30
STREAM_CHANCE = 31
STREAM_DATASET = 40

_SEED_MASK = (1 << 64) - 1


def stream(seed: int, stream_id: int, *counters: int) -> np.random.Generator:
    """Gerador Philox para a chave (seed, stream_id, *counters)"""
    entropy = [int(seed) & _SEED_MASK, int(stream_id)] + [int(c) for c in counters]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *counters: int) -> int:
    """Semente de 64 bits derivada, usada para membros de ensemble"""
    entropy = [int(seed) & _SEED_MASK] + [int(c) for c in counters]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def chunk_bounds(total: int, chunk: int):
    """Intervalos [inicio, fim) de tamanho fixo, independentes do número de workers"""
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]
