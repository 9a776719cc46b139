from tuniv.main import run

run()
