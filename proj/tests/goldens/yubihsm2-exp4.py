# generated-by: hornpoc 0.1.0 model=yubihsm2-exp4 query=iknows(key2[])
import mocktoken

token = mocktoken.open_session()

x3 = token.export_wrapped(3, 2)
x1 = mocktoken.open_wrap(token.known_value(3), x3); mocktoken.report(x1)

token.cleanup()
