"""radarkit: rastreamento inverso, testes de preferência revelada e projeto de
interferência contra um radar cognitivo."""

__version__ = "1.0.0"
