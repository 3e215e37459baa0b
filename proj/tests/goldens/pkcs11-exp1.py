# generated-by: hornpoc 0.1.0 model=pkcs11-exp1 query=iknows(key1[])
import mocktoken

token = mocktoken.open_session()

x3 = token.wrap(token.handle(2), token.handle(1))
x2 = token.decrypt(token.handle(2), x3); mocktoken.report(x2)

token.cleanup()
