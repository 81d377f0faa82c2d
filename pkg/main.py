import sys

from dotenv import load_dotenv

# Carregar variáveis de ambiente do .env
load_dotenv()

from radarkit.cli import main

if __name__ == "__main__":
    sys.exit(main())
