from dotenv import load_dotenv

# Cargar variables de entorno desde el archivo .env
load_dotenv()

from seqpart.cli import main

if __name__ == "__main__":
    main()
