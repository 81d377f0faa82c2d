from dotenv import load_dotenv
import os

# Carrega variáveis de ambiente do arquivo .env (se existir)
load_dotenv()


def _threads_from_env() -> int:
    raw = os.getenv("RADARKIT_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, min(8, os.cpu_count() or 1))
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


RADARKIT_THREADS = _threads_from_env()
LOG_LEVEL = os.getenv("RADARKIT_LOG_LEVEL", "INFO").upper()
DEFAULT_OUTPUT_DIR = os.getenv("RADARKIT_OUTPUT_DIR", "runs")
MC_CHUNK = max(1, int(os.getenv("RADARKIT_MC_CHUNK", "2048")))

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
