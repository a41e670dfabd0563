from dotenv import load_dotenv

# Cargar variables de entorno desde el archivo .env
load_dotenv()

from kemaslov.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
